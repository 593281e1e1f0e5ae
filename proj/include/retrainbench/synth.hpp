#pragma once

// Synthetic retail-like panels: level * (1 + trend) * weekly/annual seasonality + noise, optional
// intermittent zeros, ragged start dates.

#include <cmath>
#include <cstdint>
#include <string>

#include "retrainbench/panel.hpp"
#include "retrainbench/random.hpp"

namespace retrainbench {

struct SynthOptions {
  std::size_t series = 30;
  std::size_t length = 500;    // longest series
  std::size_t min_length = 0;  // 0 = every series has `length` points
  int frequency = 7;           // 7 daily, 52 weekly
  double noise = 0.15;         // relative noise scale
  double zero_share = 0.0;     // probability of a zero observation
  std::uint64_t seed = 1;
  std::string start = "2016-01-04";
  bool statics = true;  // adds a "category" static attribute
};

inline SeriesPanel make_synthetic_panel(const SynthOptions& opt) {
  if (opt.series == 0 || opt.length < 2) throw Error("synth: need at least one series of length >= 2");
  if (opt.frequency != 7 && opt.frequency != 52) throw Error("synth: frequency must be 7 or 52");
  const auto start = parse_iso_date(opt.start);
  if (!start) throw Error("synth: bad start date '" + opt.start + "'");
  Rng rng(opt.seed);
  SeriesPanel panel;
  panel.frequency = opt.frequency;
  panel.spacing_days = opt.frequency == 7 ? 1 : 7;
  if (opt.statics) panel.static_names = {"category"};
  const double pi = 3.14159265358979323846;
  const double year = opt.frequency == 7 ? 365.25 : 52.18;
  const std::size_t width = std::to_string(opt.series - 1).size();
  for (std::size_t i = 0; i < opt.series; ++i) {
    Series s;
    std::string num = std::to_string(i);
    s.id = "S" + std::string(width - num.size(), '0') + num;
    const std::size_t lo = opt.min_length ? std::min(opt.min_length, opt.length) : opt.length;
    const std::size_t n = lo + rng.below(opt.length - lo + 1);
    const std::size_t offset = opt.length - n;
    const double level = 5.0 + 45.0 * rng.uniform();
    const double trend = rng.uniform(-0.3, 0.5) / static_cast<double>(opt.length);
    const double amp = rng.uniform(0.1, 0.5);
    const double annual = rng.uniform(0.0, 0.3);
    const double phase = rng.uniform(0.0, 2.0 * pi);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = offset + k;
      double season = 1.0 + annual * std::sin(2.0 * pi * static_cast<double>(t) / year + phase);
      if (opt.frequency == 7) season *= 1.0 + amp * std::sin(2.0 * pi * static_cast<double>(t % 7) / 7.0 + phase);
      double y = level * (1.0 + trend * static_cast<double>(t)) * season;
      y *= 1.0 + opt.noise * rng.normal();
      if (opt.zero_share > 0.0 && rng.uniform() < opt.zero_share) y = 0.0;
      y = std::round(std::max(0.0, y) * 100.0) / 100.0;
      s.dates.push_back(*start + std::chrono::days{static_cast<long>(t) * panel.spacing_days});
      s.values.push_back(y);
    }
    if (opt.statics) s.statics = {i % 3 == 0 ? "food" : (i % 3 == 1 ? "household" : "hobbies")};
    detail::finalize_series(s);
    panel.series.push_back(std::move(s));
  }
  return panel;
}

}  // namespace retrainbench
