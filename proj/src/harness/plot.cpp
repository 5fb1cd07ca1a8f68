#include "vtools/harness/plot.hpp"

#include <array>
#include <ostream>

namespace vtools::harness {

namespace {

constexpr std::array<const char*, 5> kPalette{"#c0392b", "#2471a3", "#229954", "#b9770e", "#7d3c98"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_curves_svg(std::ostream& out, const std::string& title, std::span<const LevelMetrics> metrics) {
  constexpr double kW = 480, kH = 320, kLeft = 50, kRight = 130, kTop = 30, kBottom = 40;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  int max_x = 1;
  for (const auto& m : metrics) max_x = std::max(max_x, static_cast<int>(m.curve.size()));
  auto sx = [&](double x) { return kLeft + (max_x > 1 ? (x - 1) / (max_x - 1) : 0.5) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - y) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">" << escape(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (double y : {0.0, 0.5, 1.0}) {
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
        << format_number(y) << "</text>\n";
  }
  out << "<text x=\"" << sx(1) << "\" y=\"" << kH - kBottom + 15 << "\" text-anchor=\"middle\">1</text>\n"
      << "<text x=\"" << sx(max_x) << "\" y=\"" << kH - kBottom + 15 << "\" text-anchor=\"middle\">" << max_x
      << "</text>\n"
      << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 8
      << "\" text-anchor=\"middle\">placements</text>\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    const char* colour = kPalette[i % kPalette.size()];
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colour << "\" points=\"";
    for (Eigen::Index x = 0; x < m.curve.size(); ++x) {
      out << (x ? " " : "") << format_number(sx(static_cast<double>(x + 1))) << ','
          << format_number(sy(m.curve(x)));
    }
    out << "\"/>\n";
    const double ly = kTop + 12 + 16 * static_cast<double>(i);
    out << "<line x1=\"" << kW - kRight + 10 << "\" x2=\"" << kW - kRight + 28 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke-width=\"2\" stroke=\"" << colour << "\"/>\n"
        << "<text x=\"" << kW - kRight + 32 << "\" y=\"" << ly << "\">" << ssup::to_string(m.variant)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace vtools::harness
