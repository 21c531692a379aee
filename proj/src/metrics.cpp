#include "sacc/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "sacc/errors.hpp"

namespace sacc::metrics {

namespace {

void check_same_dims(const SaliencyGrid& a, const SaliencyGrid& b, const char* op) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ValidationError(std::string(op) + ": dimension mismatch " +
                              std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                              " vs " + std::to_string(b.width()) + "x" +
                              std::to_string(b.height()));
}

void check_fixations(const SaliencyGrid& s, const std::vector<FixationPoint>& fix,
                     const char* op) {
    if (fix.empty())
        throw ValidationError(std::string(op) + ": no fixations");
    for (const auto& f : fix)
        if (!s.in_bounds(f.x, f.y))
            throw ValidationError(std::string(op) + ": fixation out of bounds");
}

std::size_t pixel_index(const SaliencyGrid& s, const FixationPoint& f) {
    return static_cast<std::size_t>(static_cast<int>(f.y)) * s.width() +
           static_cast<int>(f.x);
}

} // namespace

double cc(const SaliencyGrid& a, const SaliencyGrid& b) {
    check_same_dims(a, b, "cc");
    const std::size_t n = a.size();
    double ma = a.sum() / n, mb = b.sum() / n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw ValidationError("cc: correlation undefined for a constant map");
    return sab / std::sqrt(saa * sbb);
}

double sim(const SaliencyGrid& a, const SaliencyGrid& b) {
    check_same_dims(a, b, "sim");
    const double sa = a.sum(), sb = b.sum();
    if (sa <= 0.0 || sb <= 0.0)
        throw ValidationError("sim: cannot normalize an all-zero map");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::min(a[i] / sa, b[i] / sb);
    return acc;
}

// ---- exact transportation problem (simplex on the transportation tableau) ----

double solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<double>& cost) {
    const int m = static_cast<int>(supply.size());
    const int n = static_cast<int>(demand.size());
    if (m == 0 || n == 0 || cost.size() != static_cast<std::size_t>(m) * n)
        throw ValidationError("solve_transport: bad problem shape");

    // tiny supply perturbation keeps the basis non-degenerate
    constexpr double eps = 1e-13;
    std::vector<double> a = supply, b = demand;
    for (int i = 0; i < m; ++i)
        a[static_cast<std::size_t>(i)] += eps;
    b[static_cast<std::size_t>(n - 1)] += eps * m;

    struct Cell {
        int i, j;
        double flow;
    };
    std::vector<Cell> basis;
    basis.reserve(static_cast<std::size_t>(m + n));

    // northwest-corner start
    {
        std::vector<double> ra = a, rb = b;
        int i = 0, j = 0;
        while (i < m && j < n) {
            const double f = std::min(ra[static_cast<std::size_t>(i)],
                                      rb[static_cast<std::size_t>(j)]);
            basis.push_back({i, j, f});
            ra[static_cast<std::size_t>(i)] -= f;
            rb[static_cast<std::size_t>(j)] -= f;
            if (ra[static_cast<std::size_t>(i)] <= rb[static_cast<std::size_t>(j)])
                ++i;
            else
                ++j;
        }
    }

    const double max_cost = *std::max_element(cost.begin(), cost.end());
    const double tol = std::max(1e-12, 1e-12 * max_cost);
    std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> row_cells(static_cast<std::size_t>(m)),
        col_cells(static_cast<std::size_t>(n));

    const long max_iter = 200L * (m + n) + 10000;
    for (long iter = 0; iter < max_iter; ++iter) {
        for (auto& rc : row_cells)
            rc.clear();
        for (auto& cc2 : col_cells)
            cc2.clear();
        for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
            row_cells[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)].i)].push_back(k);
            col_cells[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)].j)].push_back(k);
        }

        // potentials via BFS over the basis tree
        std::vector<char> ru(static_cast<std::size_t>(m), 0), rv(static_cast<std::size_t>(n), 0);
        std::deque<int> queue; // rows as i, cols as m+j
        u[0] = 0.0;
        ru[0] = 1;
        queue.push_back(0);
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node < m) {
                for (int k : row_cells[static_cast<std::size_t>(node)]) {
                    const auto& c = basis[static_cast<std::size_t>(k)];
                    if (!rv[static_cast<std::size_t>(c.j)]) {
                        v[static_cast<std::size_t>(c.j)] =
                            cost[static_cast<std::size_t>(c.i) * n + c.j] -
                            u[static_cast<std::size_t>(c.i)];
                        rv[static_cast<std::size_t>(c.j)] = 1;
                        queue.push_back(m + c.j);
                    }
                }
            } else {
                for (int k : col_cells[static_cast<std::size_t>(node - m)]) {
                    const auto& c = basis[static_cast<std::size_t>(k)];
                    if (!ru[static_cast<std::size_t>(c.i)]) {
                        u[static_cast<std::size_t>(c.i)] =
                            cost[static_cast<std::size_t>(c.i) * n + c.j] -
                            v[static_cast<std::size_t>(c.j)];
                        ru[static_cast<std::size_t>(c.i)] = 1;
                        queue.push_back(c.i);
                    }
                }
            }
        }

        // entering cell: most negative reduced cost
        int best_i = -1, best_j = -1;
        double best_rc = -tol;
#pragma omp parallel
        {
            int bi = -1, bj = -1;
            double br = best_rc;
#pragma omp for nowait
            for (int i = 0; i < m; ++i) {
                const double ui = u[static_cast<std::size_t>(i)];
                const double* crow = cost.data() + static_cast<std::size_t>(i) * n;
                for (int j = 0; j < n; ++j) {
                    const double rc = crow[j] - ui - v[static_cast<std::size_t>(j)];
                    if (rc < br) {
                        br = rc;
                        bi = i;
                        bj = j;
                    }
                }
            }
#pragma omp critical
            if (br < best_rc) {
                best_rc = br;
                best_i = bi;
                best_j = bj;
            }
        }
        if (best_i < 0)
            break; // optimal

        // cycle: path from col best_j back to row best_i through the tree
        std::vector<int> parent_edge(static_cast<std::size_t>(m + n), -1);
        std::vector<int> parent_node(static_cast<std::size_t>(m + n), -1);
        std::vector<char> seen(static_cast<std::size_t>(m + n), 0);
        queue.clear();
        queue.push_back(m + best_j);
        seen[static_cast<std::size_t>(m + best_j)] = 1;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node == best_i)
                break;
            const auto& inc = node < m ? row_cells[static_cast<std::size_t>(node)]
                                       : col_cells[static_cast<std::size_t>(node - m)];
            for (int k : inc) {
                const auto& c = basis[static_cast<std::size_t>(k)];
                const int other = node < m ? m + c.j : c.i;
                if (!seen[static_cast<std::size_t>(other)]) {
                    seen[static_cast<std::size_t>(other)] = 1;
                    parent_edge[static_cast<std::size_t>(other)] = k;
                    parent_node[static_cast<std::size_t>(other)] = node;
                    queue.push_back(other);
                }
            }
        }

        std::vector<int> path; // basis edge indices from best_j-side to best_i
        for (int node = best_i; node != m + best_j;
             node = parent_node[static_cast<std::size_t>(node)])
            path.push_back(parent_edge[static_cast<std::size_t>(node)]);

        // alternate signs: entering edge is +, neighbours are -
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (std::size_t t = 0; t < path.size(); ++t) {
            if (t % 2 == 0) { // minus position
                const double f = basis[static_cast<std::size_t>(path[t])].flow;
                if (f < theta) {
                    theta = f;
                    leave = path[t];
                }
            }
        }

        for (std::size_t t = 0; t < path.size(); ++t)
            basis[static_cast<std::size_t>(path[t])].flow += (t % 2 == 0 ? -theta : theta);
        basis[static_cast<std::size_t>(leave)] = {best_i, best_j, theta};
    }

    double total = 0.0;
    for (const auto& c : basis)
        total += c.flow * cost[static_cast<std::size_t>(c.i) * n + c.j];
    return total;
}

namespace {

struct SmallMap {
    int w, h;
    std::vector<double> mass; // sums to one
};

SmallMap downsample_mass(const SaliencyGrid& g, int target) {
    const int block = std::max(1, (std::max(g.width(), g.height()) + target - 1) / target);
    const int dw = (g.width() + block - 1) / block;
    const int dh = (g.height() + block - 1) / block;
    SmallMap m{dw, dh, std::vector<double>(static_cast<std::size_t>(dw) * dh, 0.0)};
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            m.mass[static_cast<std::size_t>(y / block) * dw + x / block] += g.at(x, y);
    const double total = std::accumulate(m.mass.begin(), m.mass.end(), 0.0);
    if (total <= 0.0)
        throw ValidationError("emd: cannot normalize an all-zero map");
    for (double& v : m.mass)
        v /= total;
    return m;
}

} // namespace

double emd(const SaliencyGrid& a, const SaliencyGrid& b, int downsample) {
    check_same_dims(a, b, "emd");
    const SmallMap ma = downsample_mass(a, downsample);
    const SmallMap mb = downsample_mass(b, downsample);

    std::vector<double> supply, demand;
    std::vector<int> sx, sy, dx, dy;
    for (int y = 0; y < ma.h; ++y)
        for (int x = 0; x < ma.w; ++x) {
            const double v = ma.mass[static_cast<std::size_t>(y) * ma.w + x];
            if (v > 0.0) {
                supply.push_back(v);
                sx.push_back(x);
                sy.push_back(y);
            }
        }
    for (int y = 0; y < mb.h; ++y)
        for (int x = 0; x < mb.w; ++x) {
            const double v = mb.mass[static_cast<std::size_t>(y) * mb.w + x];
            if (v > 0.0) {
                demand.push_back(v);
                dx.push_back(x);
                dy.push_back(y);
            }
        }

    std::vector<double> cost(supply.size() * demand.size());
    for (std::size_t i = 0; i < supply.size(); ++i)
        for (std::size_t j = 0; j < demand.size(); ++j)
            cost[i * demand.size() + j] =
                std::hypot(static_cast<double>(sx[i] - dx[j]), static_cast<double>(sy[i] - dy[j]));

    return solve_transport(supply, demand, cost);
}

double nss(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations) {
    check_fixations(s, fixations, "nss");
    const std::size_t n = s.size();
    const double mean = s.sum() / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        ss += (s[i] - mean) * (s[i] - mean);
    const double sd = std::sqrt(ss / n);
    if (sd <= 0.0)
        throw ValidationError("nss: undefined for a constant map");
    double acc = 0.0;
    for (const auto& f : fixations)
        acc += (s[pixel_index(s, f)] - mean) / sd;
    return acc / fixations.size();
}

namespace {

double roc_auc(std::vector<double> pos, std::vector<double> neg) {
    std::vector<double> thresholds = pos;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());

    auto frac_ge = [](const std::vector<double>& v, double t) {
        const auto it = std::lower_bound(v.begin(), v.end(), t);
        return static_cast<double>(v.end() - it) / static_cast<double>(v.size());
    };

    std::vector<std::pair<double, double>> pts; // (fpr, tpr)
    pts.emplace_back(0.0, 0.0);
    for (double t : thresholds)
        pts.emplace_back(frac_ge(neg, t), frac_ge(pos, t));
    pts.emplace_back(1.0, 1.0);
    std::sort(pts.begin(), pts.end());

    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        auc += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
    return auc;
}

} // namespace

double auc_judd(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations) {
    check_fixations(s, fixations, "auc_judd");
    std::unordered_set<std::size_t> fix_pixels;
    std::vector<double> pos;
    pos.reserve(fixations.size());
    for (const auto& f : fixations) {
        const std::size_t idx = pixel_index(s, f);
        fix_pixels.insert(idx);
        pos.push_back(s[idx]);
    }
    std::vector<double> neg;
    neg.reserve(s.size() - fix_pixels.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!fix_pixels.count(i))
            neg.push_back(s[i]);
    if (neg.empty())
        throw ValidationError("auc_judd: every pixel is fixated");
    return roc_auc(std::move(pos), std::move(neg));
}

double auc_borji(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations,
                 int n_splits, std::uint64_t seed) {
    check_fixations(s, fixations, "auc_borji");
    if (n_splits < 1)
        throw ConfigError("auc_borji: n_splits must be >= 1");
    std::vector<double> pos;
    pos.reserve(fixations.size());
    for (const auto& f : fixations)
        pos.push_back(s[pixel_index(s, f)]);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    double acc = 0.0;
    for (int k = 0; k < n_splits; ++k) {
        std::vector<double> neg(pos.size());
        for (double& v : neg)
            v = s[pick(rng)];
        acc += roc_auc(pos, std::move(neg));
    }
    return acc / n_splits;
}

MetricReport evaluate_all(const SaliencyGrid& s, const SaliencyGrid& human_map,
                          const std::vector<FixationPoint>& fixations) {
    MetricReport r;
    auto run = [&r](const char* name, std::optional<double>& slot, auto&& fn) {
        try {
            slot = fn();
        } catch (const std::exception& e) {
            r.errors.push_back(std::string(name) + ": " + e.what());
        }
    };
    run("cc", r.cc, [&] { return cc(s, human_map); });
    run("sim", r.sim, [&] { return sim(s, human_map); });
    run("emd", r.emd, [&] { return emd(s, human_map); });
    run("auc_judd", r.auc_judd, [&] { return auc_judd(s, fixations); });
    run("auc_borji", r.auc_borji, [&] { return auc_borji(s, fixations); });
    run("nss", r.nss, [&] { return nss(s, fixations); });
    return r;
}

std::string report_csv_header() {
    return "image_id,group_id,model,cc,sim,emd,auc_judd,auc_borji,nss";
}

namespace {

void append_field(std::ostringstream& out, const std::optional<double>& v) {
    out << ',';
    if (v)
        out << *v;
}

} // namespace

std::string report_csv_row(const std::string& image_id, const std::string& group_id,
                           const std::string& model, const MetricReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << image_id << ',' << group_id << ',' << model;
    append_field(out, r.cc);
    append_field(out, r.sim);
    append_field(out, r.emd);
    append_field(out, r.auc_judd);
    append_field(out, r.auc_borji);
    append_field(out, r.nss);
    return out.str();
}

std::string report_json(const MetricReport& r) {
    nlohmann::json j;
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = nullptr;
    };
    put("cc", r.cc);
    put("sim", r.sim);
    put("emd", r.emd);
    put("auc_judd", r.auc_judd);
    put("auc_borji", r.auc_borji);
    put("nss", r.nss);
    j["errors"] = r.errors;
    return j.dump();
}

} // namespace sacc::metrics
