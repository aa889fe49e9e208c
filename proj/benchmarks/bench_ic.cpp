// Cross-sectional information-coefficient throughput.
#include <benchmark/benchmark.h>

#include <cstdio>
#include <string>
#include <vector>

#include "alphadesk/common/rng.hpp"
#include "alphadesk/metrics/metrics.hpp"

namespace {

using alphadesk::dsl::FactorMatrix;

std::string iso_date(int idx) {
  const int year = 2015 + idx / (12 * 28);
  const int month = (idx / 28) % 12 + 1;
  const int day = idx % 28 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

FactorMatrix random_surface(std::size_t n_dates, std::size_t n_instruments,
                            std::uint64_t seed) {
  std::vector<std::string> dates;
  std::vector<std::string> instruments;
  for (std::size_t d = 0; d < n_dates; ++d) dates.push_back(iso_date(static_cast<int>(d)));
  for (std::size_t i = 0; i < n_instruments; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "I%04u", static_cast<unsigned>(i));
    instruments.emplace_back(buf);
  }
  FactorMatrix m = alphadesk::dsl::make_matrix(dates, instruments);
  alphadesk::RngStream rng(seed);
  for (std::size_t c = 0; c < m.values.size(); ++c) {
    m.values[c] = rng.normal();
    m.mask[c] = 1;
  }
  return m;
}

void bm_ic_spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto factor = random_surface(252, n, 3);
  alphadesk::metrics::ForwardReturns fwd;
  fwd.horizon = 1;
  fwd.surface = random_surface(252, n, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphadesk::metrics::information_coefficient(
        factor, fwd, alphadesk::metrics::IcMethod::spearman));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 252 * state.range(0));
}

void bm_ic_pearson(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto factor = random_surface(252, n, 3);
  alphadesk::metrics::ForwardReturns fwd;
  fwd.horizon = 1;
  fwd.surface = random_surface(252, n, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphadesk::metrics::information_coefficient(
        factor, fwd, alphadesk::metrics::IcMethod::pearson));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 252 * state.range(0));
}

}  // namespace

BENCHMARK(bm_ic_spearman)->Arg(100)->Arg(500);
BENCHMARK(bm_ic_pearson)->Arg(100)->Arg(500);
