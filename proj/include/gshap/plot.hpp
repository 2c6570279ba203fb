#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gshap/csv.hpp"
#include "gshap/experiment.hpp"

namespace gshap {

/// Self-contained SVG: one panel per model, boxes per (rho, grouping) on a
/// log10 y-axis, black dot at the mean. Values at or below `floor` are drawn
/// at `floor`.
inline std::string render_boxplots(const std::vector<BoxSummary>& summaries,
                                   const std::string& title, double floor = 1e-16) {
  std::vector<std::string> models;
  std::vector<double> rhos;
  std::vector<char> groupings;
  for (const auto& s : summaries) {
    if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
    if (std::find(rhos.begin(), rhos.end(), s.rho) == rhos.end()) rhos.push_back(s.rho);
    if (std::find(groupings.begin(), groupings.end(), s.grouping) == groupings.end()) {
      groupings.push_back(s.grouping);
    }
  }
  std::sort(rhos.begin(), rhos.end());
  std::sort(groupings.begin(), groupings.end());

  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : summaries) {
    lo = std::min(lo, std::max(s.whisker_low, floor));
    hi = std::max({hi, std::max(s.whisker_high, floor), std::max(s.mean, floor)});
  }
  if (summaries.empty()) lo = hi = 1.0;
  double log_lo = std::floor(std::log10(lo)), log_hi = std::ceil(std::log10(hi));
  if (log_hi <= log_lo) log_hi = log_lo + 1;

  const double panel_w = 320, panel_h = 260, margin_l = 60, margin_t = 50, margin_b = 50;
  const double width = margin_l + panel_w * static_cast<double>(std::max<std::size_t>(models.size(), 1)) + 20;
  const double height = margin_t + panel_h + margin_b;
  const char* colours[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52"};

  auto y_of = [&](double v) {
    const double lv = std::log10(std::max(v, floor));
    return margin_t + panel_h * (1.0 - (lv - log_lo) / (log_hi - log_lo));
  };
  auto fmt = [](double v) { return csv::format_double(std::round(v * 100.0) / 100.0); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  for (int e = static_cast<int>(log_lo); e <= static_cast<int>(log_hi); ++e) {
    const double y = y_of(std::pow(10.0, e));
    svg << "<line x1=\"" << margin_l << "\" x2=\"" << width - 20 << "\" y1=\"" << y
        << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << margin_l - 5 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const double x0 = margin_l + panel_w * static_cast<double>(mi);
    svg << "<rect x=\"" << x0 << "\" y=\"" << margin_t << "\" width=\"" << panel_w
        << "\" height=\"" << panel_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << margin_t - 6
        << "\" text-anchor=\"middle\">" << models[mi] << "</text>\n";
    const double slot = panel_w / static_cast<double>(std::max<std::size_t>(rhos.size(), 1));
    const double box_w = slot * 0.7 / static_cast<double>(std::max<std::size_t>(groupings.size(), 1));
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      const double sx = x0 + slot * static_cast<double>(ri);
      svg << "<text x=\"" << sx + slot / 2 << "\" y=\"" << margin_t + panel_h + 15
          << "\" text-anchor=\"middle\">" << fmt(rhos[ri]) << "</text>\n";
      for (std::size_t gi = 0; gi < groupings.size(); ++gi) {
        const auto* s = find_summary(summaries, models[mi], groupings[gi], rhos[ri]);
        if (!s) continue;
        const double bx = sx + slot * 0.15 + box_w * static_cast<double>(gi);
        const double cx = bx + box_w / 2;
        const char* colour = colours[gi % 4];
        svg << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y_of(s->whisker_low)
            << "\" y2=\"" << y_of(s->whisker_high) << "\" stroke=\"#333\"/>\n";
        svg << "<rect x=\"" << bx + 1 << "\" y=\"" << y_of(s->q3) << "\" width=\"" << box_w - 2
            << "\" height=\"" << std::max(y_of(s->q1) - y_of(s->q3), 0.5) << "\" fill=\""
            << colour << "\" stroke=\"#333\"/>\n";
        svg << "<line x1=\"" << bx + 1 << "\" x2=\"" << bx + box_w - 1 << "\" y1=\""
            << y_of(s->median) << "\" y2=\"" << y_of(s->median)
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        svg << "<circle cx=\"" << cx << "\" cy=\"" << y_of(s->mean)
            << "\" r=\"2.5\" fill=\"black\"/>\n";
      }
    }
  }
  svg << "<text x=\"" << margin_l + (width - margin_l) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">correlation between groups</text>\n";
  for (std::size_t gi = 0; gi < groupings.size(); ++gi) {
    const double lx = width - 120 + 55 * static_cast<double>(gi);
    svg << "<rect x=\"" << lx << "\" y=\"30\" width=\"10\" height=\"10\" fill=\""
        << colours[gi % 4] << "\"/><text x=\"" << lx + 14 << "\" y=\"39\">"
        << "group " << groupings[gi] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gshap
