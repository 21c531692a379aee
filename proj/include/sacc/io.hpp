#pragma once

#include <filesystem>
#include <string>

#include "sacc/grid.hpp"

namespace sacc::io {

/// Raw float container: magic "SGF1", u32le width, u32le height,
/// then W*H f32le values row-major.
SaliencyGrid load_sgf(const std::filesystem::path& path);
void save_sgf(const SaliencyGrid& grid, const std::filesystem::path& path);

/// 8- or 16-bit grayscale PNG. Values are rescaled to [0,1] on load and
/// renormalized sum-to-one. Saving rescales to the full 16-bit range.
SaliencyGrid load_png(const std::filesystem::path& path);
void save_png(const SaliencyGrid& grid, const std::filesystem::path& path);

/// Dispatch on extension (.png vs anything else = SGF).
SaliencyGrid load_grid(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace sacc::io
