#include "spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace dns::spectral {
namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW planning is not thread-safe; execution with new-array calls is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plans] : plans_) {
      fftw_destroy_plan(plans.r2c);
      fftw_destroy_plan(plans.c2r);
    }
  }

  PlanPair get(int nx, int ny) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({nx, ny});
    if (it != plans_.end()) return it->second;
    const std::size_t real_size = static_cast<std::size_t>(nx) * ny;
    const std::size_t complex_size = static_cast<std::size_t>(nx / 2 + 1) * ny;
    std::vector<double> re(real_size);
    std::vector<Complex> co(complex_size);
    auto* cptr = reinterpret_cast<fftw_complex*>(co.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair plans;
    plans.r2c = fftw_plan_dft_r2c_2d(ny, nx, re.data(), cptr, flags);
    plans.c2r = fftw_plan_dft_c2r_2d(ny, nx, cptr, re.data(), flags);
    if (plans.r2c == nullptr || plans.c2r == nullptr)
      throw std::runtime_error("FFTW planning failed");
    plans_.emplace(std::make_pair(nx, ny), plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void require_periodic(const GridSpec& spec) {
  if (!spec.periodic()) throw std::logic_error("spectral transform needs a periodic grid");
}

}  // namespace

Wavenumbers derivative_wavenumbers(const GridSpec& spec) {
  require_periodic(spec);
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  Wavenumbers k;
  const double sx = 2.0 * std::numbers::pi / spec.extent[0];
  const double sy = 2.0 * std::numbers::pi / spec.extent[1];
  k.kx.resize(nx / 2 + 1);
  for (int a = 0; a <= nx / 2; ++a) k.kx[a] = (a == nx / 2) ? 0.0 : sx * a;
  k.ky.resize(ny);
  for (int b = 0; b < ny; ++b) {
    const int m = b <= ny / 2 ? b : b - ny;
    k.ky[b] = (b == ny / 2) ? 0.0 : sy * m;
  }
  return k;
}

Spectrum forward(const GridSpec& spec, std::span<const double> samples) {
  require_periodic(spec);
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  if (samples.size() != spec.node_count()) throw std::invalid_argument("spectrum shape mismatch");
  Spectrum out;
  out.nkx = nx / 2 + 1;
  out.ny = ny;
  out.data.resize(static_cast<std::size_t>(out.nkx) * ny);
  std::vector<double> in(samples.begin(), samples.end());
  const auto plans = cache().get(nx, ny);
  fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data.data()));
  return out;
}

std::vector<double> inverse(const GridSpec& spec, Spectrum spectrum) {
  require_periodic(spec);
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  std::vector<double> out(spec.node_count());
  const auto plans = cache().get(nx, ny);
  fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(spectrum.data.data()),
                       out.data());
  const double scale = 1.0 / (static_cast<double>(nx) * ny);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace dns::spectral
