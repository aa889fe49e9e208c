// Expression-evaluation throughput over a dense synthetic panel.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/dsl/parser.hpp"
#include "alphadesk/panel/panel.hpp"

namespace {

std::string iso_date(int idx) {
  const int year = 2015 + idx / (12 * 28);
  const int month = (idx / 28) % 12 + 1;
  const int day = idx % 28 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

alphadesk::panel::PanelFrame dense_panel(std::size_t n_instruments, std::size_t n_dates) {
  alphadesk::panel::PanelFrame panel;
  for (std::size_t d = 0; d < n_dates; ++d) panel.dates.push_back(iso_date(static_cast<int>(d)));
  for (std::size_t i = 0; i < n_instruments; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "I%04u", static_cast<unsigned>(i));
    panel.instruments.emplace_back(buf);
  }
  panel.fields = {"close", "volume"};
  panel.values.resize(n_dates * n_instruments * 2);
  panel.mask.assign(panel.values.size(), 1);
  alphadesk::RngStream rng(17);
  for (std::size_t i = 0; i < n_instruments; ++i) {
    double price = 100.0 + rng.uniform(-20.0, 20.0);
    for (std::size_t d = 0; d < n_dates; ++d) {
      price *= 1.0 + 0.01 * rng.normal();
      panel.values[panel.index(d, i, 0)] = price;
      panel.values[panel.index(d, i, 1)] = 1e6 * (1.0 + rng.uniform01());
    }
  }
  return panel;
}

void bm_eval_ts_corr(benchmark::State& state) {
  const auto panel = dense_panel(static_cast<std::size_t>(state.range(0)), 504);
  const auto expr = alphadesk::dsl::parse("-ts_corr(rank(close), rank(volume), 50)");
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphadesk::dsl::evaluate(expr, panel));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0) * 504);
}

void bm_eval_arithmetic(benchmark::State& state) {
  const auto panel = dense_panel(static_cast<std::size_t>(state.range(0)), 504);
  const auto expr =
      alphadesk::dsl::parse("zscore(ts_mean(close, 20) / ts_std(close, 20) - rank(volume))");
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphadesk::dsl::evaluate(expr, panel));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0) * 504);
}

}  // namespace

BENCHMARK(bm_eval_ts_corr)->Arg(50)->Arg(200);
BENCHMARK(bm_eval_arithmetic)->Arg(50)->Arg(200);
