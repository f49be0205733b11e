#include "cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mtd/error.hpp"
#include "mtd/image_io.hpp"

namespace mtd::cli {

void write_error_plot_svg(std::span<const SweepSummary> summary, const std::filesystem::path& path) {
  if (summary.empty()) throw ConfigError("nothing to plot");
  const double width = 640, height = 420, left = 70, right = 20, top = 30, bottom = 60;
  double xmin = summary.front().snr, xmax = xmin, ymax = 0.0;
  for (const SweepSummary& s : summary) {
    if (!(s.snr > 0.0)) throw ConfigError("SNR values must be positive for a log axis");
    xmin = std::min(xmin, s.snr);
    xmax = std::max(xmax, s.snr);
    if (std::isfinite(s.mean_error)) ymax = std::max(ymax, s.mean_error);
  }
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::max(std::ceil(std::log10(xmax)), lx0 + 1);
  ymax = ymax > 0.0 ? ymax * 1.1 : 1.0;
  auto px = [&](double snr) { return left + (std::log10(snr) - lx0) / (lx1 - lx0) * (width - left - right); };
  auto py = [&](double e) { return height - bottom - e / ymax * (height - top - bottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(lx0); d <= static_cast<int>(lx1); ++d) {
    const double x = px(std::pow(10.0, d));
    svg << "<line x1=\"" << x << "\" y1=\"" << height - bottom << "\" x2=\"" << x << "\" y2=\"" << height - bottom + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << height - bottom + 20 << "\" text-anchor=\"middle\">1e" << d
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double e = ymax * i / 4.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3)
        << e << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">SNR</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + height - bottom) / 2 << ")\">mean error E</text>\n";

  const char* colors[] = {"#d62728", "#1f77b4"};
  const char* labels[] = {"no prior", "prior"};
  for (int flag = 0; flag < 2; ++flag) {
    std::vector<SweepSummary> series;
    for (const SweepSummary& s : summary) {
      if (s.prior == static_cast<bool>(flag) && std::isfinite(s.mean_error)) series.push_back(s);
    }
    if (series.empty()) continue;
    std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.snr < b.snr; });
    svg << "<polyline fill=\"none\" stroke=\"" << colors[flag] << "\" stroke-width=\"2\" points=\"";
    for (const SweepSummary& s : series) svg << px(s.snr) << "," << py(s.mean_error) << " ";
    svg << "\"/>\n";
    for (const SweepSummary& s : series) {
      svg << "<circle cx=\"" << px(s.snr) << "\" cy=\"" << py(s.mean_error) << "\" r=\"3\" fill=\"" << colors[flag]
          << "\"/>\n";
    }
    const double ly = top + 10 + 18 * flag;
    svg << "<line x1=\"" << width - right - 110 << "\" y1=\"" << ly << "\" x2=\"" << width - right - 85 << "\" y2=\""
        << ly << "\" stroke=\"" << colors[flag] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - right - 78 << "\" y=\"" << ly + 4 << "\">" << labels[flag] << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << svg.str();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_panel(const std::vector<std::vector<Image>>& rows, int cell, const std::filesystem::path& path) {
  if (rows.empty() || cell < 1) throw ConfigError("panel needs at least one row and a positive cell size");
  std::size_t columns = 0;
  for (const auto& row : rows) columns = std::max(columns, row.size());
  if (columns == 0) throw ConfigError("panel rows are empty");
  const int gap = 2;
  const int w = static_cast<int>(columns) * (cell + gap) + gap;
  const int h = static_cast<int>(rows.size()) * (cell + gap) + gap;
  Image panel(w, h, 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const Image& img = rows[i][j];
      const int r0 = gap + static_cast<int>(i) * (cell + gap);
      const int c0 = gap + static_cast<int>(j) * (cell + gap);
      for (int r = 0; r < cell; ++r) {
        for (int c = 0; c < cell; ++c) {
          panel.at(r0 + r, c0 + c) = img.at(r * img.height() / cell, c * img.width() / cell);
        }
      }
    }
  }
  save_image(panel, path);
}

}  // namespace mtd::cli
