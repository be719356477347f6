#pragma once

// Key rate and optimal intensity versus channel length for the soft-filter,
// beam-splitting and USD-like attacks, plus CSV/SVG output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cowsf/errors.hpp"
#include "cowsf/optimizer.hpp"
#include "cowsf/strategies.hpp"

namespace cowsf {

enum class CurveAttack { SoftFilter, BeamSplitter, UsdLike };

constexpr std::string_view to_string(CurveAttack a) noexcept {
  switch (a) {
    case CurveAttack::SoftFilter:
      return "sf";
    case CurveAttack::BeamSplitter:
      return "bs";
    case CurveAttack::UsdLike:
      return "usd";
  }
  return "?";
}

inline CurveAttack parse_curve_attack(std::string_view s) {
  if (s == "sf") return CurveAttack::SoftFilter;
  if (s == "bs") return CurveAttack::BeamSplitter;
  if (s == "usd") return CurveAttack::UsdLike;
  throw argument_error("unknown attack '" + std::string(s) + "' (expected sf, bs or usd)");
}

struct CurveRow {
  double length_km = 0.0;
  CurveAttack attack = CurveAttack::SoftFilter;
  double mu_a = 0.0;
  double eve_info_bits = 0.0;
  double emit_fraction = 0.0;
  double control_fraction = 0.0;
  double click_rate = 0.0;
  double key_rate = 0.0;
};

struct CurveSettings {
  ChannelParams channel{};
  std::optional<double> fixed_mu_a;  ///< nullopt: optimize Alice's intensity
  StatisticsMode mode = StatisticsMode::StrictStatistics;
  std::vector<double> lengths{10, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250};
  std::vector<CurveAttack> attacks{CurveAttack::SoftFilter, CurveAttack::BeamSplitter, CurveAttack::UsdLike};
  OptimizerSettings optimizer{};
  IntensitySearch search{};
  UsdSearchSettings usd{};
  unsigned workers = 1;
};

namespace detail {

inline CurveRow row_from(double length, CurveAttack attack, const ProtocolParams& p, const StrategyPoint& pt,
                         double eve_info, double key) {
  CurveRow r;
  r.length_km = length;
  r.attack = attack;
  r.mu_a = p.mu_a.value();
  r.eve_info_bits = eve_info;
  r.emit_fraction = pt.emit_fraction;
  r.control_fraction = pt.control_fraction;
  r.click_rate = strategy_click_rate(pt, p);
  r.key_rate = key;
  return r;
}

inline CurveRow soft_filter_row(const CurveSettings& s, double length) {
  if (s.fixed_mu_a) {
    const auto p = s.channel.with(MeanPhotonNumber(*s.fixed_mu_a), length);
    const auto res = optimize_attack(p, s.mode, s.optimizer);
    return row_from(length, CurveAttack::SoftFilter, p, res.achieved_point, res.eve_info, res.key_rate_bound);
  }
  const auto best = optimal_alice_intensity(s.channel, length, s.mode, s.optimizer, s.search);
  const auto p = s.channel.with(best.mu_a, length);
  return row_from(length, CurveAttack::SoftFilter, p, best.attack.achieved_point, best.attack.eve_info,
                  best.key_rate);
}

inline CurveRow beam_splitter_row(const CurveSettings& s, double length) {
  const double mu = s.fixed_mu_a ? *s.fixed_mu_a : optimal_bs_intensity(s.channel, length).mu_a.value();
  const auto p = s.channel.with(MeanPhotonNumber(mu), length);
  const auto pt = bs_point(p);
  return row_from(length, CurveAttack::BeamSplitter, p, pt, pt.eve_info_per_emitted_bit, key_rate(p, pt));
}

// Where the USD-like attack reproduces Bob's statistics Eve knows every key
// bit; below that intensity she has nothing and the honest rate is the bound.
inline CurveRow usd_row(const CurveSettings& s, double length) {
  double mu = 0.0;
  if (s.fixed_mu_a) {
    mu = *s.fixed_mu_a;
  } else {
    const auto th = usd_feasibility_threshold(s.channel, length, s.mode, s.usd);
    mu = th.status == ThresholdStatus::NoneFeasible ? s.usd.mu_a_max : th.mu_a;
  }
  const auto p = s.channel.with(MeanPhotonNumber(mu), length);
  const auto honest = passthrough_point(p);
  if (s.fixed_mu_a && usd_like_feasible(p, s.mode, s.usd)) {
    return row_from(length, CurveAttack::UsdLike, p, honest, 1.0, 0.0);
  }
  return row_from(length, CurveAttack::UsdLike, p, honest, 0.0, key_rate(p, honest));
}

}  // namespace detail

/// One row per (length, attack), lengths outermost, in the requested order.
inline std::vector<CurveRow> compute_curves(const CurveSettings& s) {
  if (s.lengths.empty()) throw argument_error("curve needs at least one length");
  for (const double L : s.lengths) {
    if (!(L >= 0.0)) throw argument_error("lengths must be non-negative");
  }
  if (s.fixed_mu_a && !(*s.fixed_mu_a > 0.0)) throw argument_error("fixed mu_a must be positive");

  struct Task {
    double length;
    CurveAttack attack;
  };
  std::vector<Task> tasks;
  for (const double L : s.lengths) {
    for (const auto a : s.attacks) tasks.push_back({L, a});
  }
  std::vector<CurveRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto& t = tasks[i];
        switch (t.attack) {
          case CurveAttack::SoftFilter:
            rows[i] = detail::soft_filter_row(s, t.length);
            break;
          case CurveAttack::BeamSplitter:
            rows[i] = detail::beam_splitter_row(s, t.length);
            break;
          case CurveAttack::UsdLike:
            rows[i] = detail::usd_row(s, t.length);
            break;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(s.workers, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr std::string_view kCurveHeader =
    "length_km,attack,mu_a,eve_info_bits,emit_fraction,control_fraction,click_rate,key_rate";

/// `comment` (if any) goes first as a '#' line.
inline void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kCurveHeader << '\n';
  for (const auto& r : rows) {
    out << format_number(r.length_km) << ',' << to_string(r.attack) << ',' << format_number(r.mu_a) << ','
        << format_number(r.eve_info_bits) << ',' << format_number(r.emit_fraction) << ','
        << format_number(r.control_fraction) << ',' << format_number(r.click_rate) << ','
        << format_number(r.key_rate) << '\n';
  }
}

struct OverlayPoint {
  double length_km = 0.0;
  double key_rate = 0.0;
  std::string series_label;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& cell, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw argument_error("overlay line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace detail

/// Reads an overlay series file: a header naming length_km, key_rate and
/// series_label (any order, extra columns ignored), '#' lines skipped.
inline std::vector<OverlayPoint> read_overlay_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto head = detail::split_csv_line(line);
    for (std::size_t i = 0; i < head.size(); ++i) col[head[i]] = i;
    break;
  }
  for (const char* need : {"length_km", "key_rate", "series_label"}) {
    if (!col.count(need)) throw argument_error(std::string("overlay header lacks column '") + need + "'");
  }
  std::vector<OverlayPoint> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::size_t need = std::max({col["length_km"], col["key_rate"], col["series_label"]}) + 1;
    if (cells.size() < need) throw argument_error("overlay line " + std::to_string(line_no) + ": too few columns");
    OverlayPoint p;
    p.length_km = detail::parse_cell(cells[col["length_km"]], line_no);
    p.key_rate = detail::parse_cell(cells[col["key_rate"]], line_no);
    p.series_label = cells[col["series_label"]];
    if (p.series_label.empty()) throw argument_error("overlay line " + std::to_string(line_no) + ": empty label");
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Key rate (log scale) versus length, one polyline per series.
inline void write_curve_svg(std::ostream& out, const std::vector<CurveRow>& rows,
                            const std::vector<OverlayPoint>& overlay = {}) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  auto add = [&](const std::string& name, double x, double y) {
    if (!series.count(name)) order.push_back(name);
    if (y > 0.0 && std::isfinite(y)) series[name].push_back({x, y});
    else series[name];
  };
  for (const auto& r : rows) add(std::string(to_string(r.attack)), r.length_km, r.key_rate);
  for (const auto& p : overlay) add(p.series_label, p.length_km, p.key_rate);

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, std::log10(y));
      y1 = std::max(y1, std::log10(y));
    }
  }
  if (x0 > x1) {
    x0 = 0;
    x1 = 1;
    y0 = -1;
    y1 = 0;
  }
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 == y0) y1 = y0 + 1;

  const double W = 640, H = 420, L = 70, R = 140, T = 20, B = 50;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return T + (y1 - std::log10(y)) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    const double y = py(std::pow(10.0, e));
    out << "<text x=\"" << L - 6 << "\" y=\"" << format_number(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double x = x0 + (x1 - x0) * i / 5.0;
    out << "<text x=\"" << format_number(px(x)) << "\" y=\"" << H - B + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_number(x) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">length (km)</text>\n";
  out << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << H / 2
      << ")\" text-anchor=\"middle\">key rate (bits/signal)</text>\n";
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& pts = series[order[k]];
    const char* c = colors[k % 7];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << (i ? " " : "") << format_number(px(pts[i].first)) << ',' << format_number(py(pts[i].second));
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 + 16 * k << "\" font-size=\"12\" fill=\"" << c << "\">"
        << detail::xml_escape(order[k]) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace cowsf
