#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mtd/image.hpp"
#include "mtd/sweep.hpp"

namespace mtd::cli {

/// Line plot of mean error against SNR (log axis), one series per prior flag.
void write_error_plot_svg(std::span<const SweepSummary> summary, const std::filesystem::path& path);

/// Grid of images, one row per entry, each image scaled (nearest neighbour)
/// to a cell x cell tile. Written with save_image().
void write_panel(const std::vector<std::vector<Image>>& rows, int cell, const std::filesystem::path& path);

}  // namespace mtd::cli
