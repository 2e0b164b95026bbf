#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace ksq::detail {

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mu);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    // The planner may scribble on its buffer, so plan on scratch memory.
    std::vector<std::complex<double>> scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(std::make_pair(n, sign), plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft_inplace(std::complex<double>* data, std::size_t n, int sign) {
  if (n == 0) return;
  fftw_plan plan = cache().get(n, sign);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

}  // namespace ksq::detail
