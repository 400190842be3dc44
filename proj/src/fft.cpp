#include "fmtk/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "fmtk/error.hpp"

namespace fmtk {

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex, FftwFree>;

Buffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw Error(Errc::TooLarge, "FFT buffer allocation failed");
  return Buffer(p);
}

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (shape, sign) and kept for the process lifetime.
std::mutex g_plan_mutex;
std::map<std::pair<std::vector<int>, int>, fftw_plan> g_plans;

fftw_plan get_plan(const std::vector<int>& dims, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(dims, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  Buffer in = make_buffer(total);
  Buffer out = make_buffer(total);
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in.get(), out.get(),
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  if (plan == nullptr) throw Error(Errc::InvalidArgument, "FFTW could not plan transform");
  g_plans.emplace(std::move(key), plan);
  return plan;
}

std::size_t product(const std::vector<int>& dims) {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  return total;
}

// Linear index map from centered order to FFT order: per axis i -> (i − n/2) mod n.
std::vector<std::size_t> shift_map(const std::vector<int>& dims) {
  const std::size_t total = product(dims);
  std::vector<std::size_t> map(total);
  const int nd = static_cast<int>(dims.size());
  std::vector<int> idx(nd, 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t target = 0;
    for (int a = 0; a < nd; ++a) {
      const int n = dims[a];
      const int shifted = ((idx[a] - n / 2) % n + n) % n;
      target = target * static_cast<std::size_t>(n) + static_cast<std::size_t>(shifted);
    }
    map[lin] = target;
    for (int a = nd - 1; a >= 0; --a) {
      if (++idx[a] < dims[a]) break;
      idx[a] = 0;
    }
  }
  return map;
}

}  // namespace

void centered_dft(CVec& data, const std::vector<int>& dims, int sign) {
  const std::size_t total = product(dims);
  if (data.size() != total) throw Error(Errc::DimensionMismatch, "centered_dft: size does not match dims");
  fftw_plan plan = get_plan(dims, sign);
  Buffer in = make_buffer(total);
  Buffer out = make_buffer(total);
  const auto map = shift_map(dims);
  for (std::size_t i = 0; i < total; ++i) {
    in.get()[map[i]][0] = data[i].real();
    in.get()[map[i]][1] = data[i].imag();
  }
  fftw_execute_dft(plan, in.get(), out.get());
  for (std::size_t i = 0; i < total; ++i) {
    data[i] = cd(out.get()[map[i]][0], out.get()[map[i]][1]);
  }
}

CVec upsample(const CVec& data, const std::vector<int>& dims, int factor) {
  if (factor == 1) return data;
  if (factor < 1) throw Error(Errc::InvalidArgument, "upsample factor must be >= 1");
  for (int d : dims) {
    if (d % 2 != 0) throw Error(Errc::InvalidArgument, "upsample needs even axis lengths");
  }
  CVec spec = data;
  centered_dft(spec, dims, -1);
  std::vector<int> fine(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) fine[a] = dims[a] * factor;
  const std::size_t total = product(dims);
  CVec padded(product(fine), cd(0.0, 0.0));
  const int nd = static_cast<int>(dims.size());
  std::vector<int> idx(nd, 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t target = 0;
    for (int a = 0; a < nd; ++a) {
      const int off = fine[a] / 2 - dims[a] / 2;
      target = target * static_cast<std::size_t>(fine[a]) + static_cast<std::size_t>(idx[a] + off);
    }
    padded[target] = spec[lin];
    for (int a = nd - 1; a >= 0; --a) {
      if (++idx[a] < dims[a]) break;
      idx[a] = 0;
    }
  }
  centered_dft(padded, fine, +1);
  const double scale = 1.0 / static_cast<double>(total);
  for (auto& v : padded) v *= scale;
  return padded;
}

CVec spectral_derivative(const CVec& data, const std::vector<int>& dims, int axis, double step) {
  CVec spec = data;
  centered_dft(spec, dims, -1);
  const int nd = static_cast<int>(dims.size());
  std::size_t inner = 1;
  for (int a = axis + 1; a < nd; ++a) inner *= static_cast<std::size_t>(dims[a]);
  const int n = dims[axis];
  const double dw = 1.0 / (n * step);
  for (std::size_t lin = 0; lin < spec.size(); ++lin) {
    const int k = static_cast<int>((lin / inner) % static_cast<std::size_t>(n));
    const int q = k - n / 2;
    if (n % 2 == 0 && k == 0) {
      spec[lin] = 0.0;
    } else {
      spec[lin] *= cd(0.0, 2.0 * kPi * q * dw);
    }
  }
  centered_dft(spec, dims, +1);
  const double scale = 1.0 / static_cast<double>(product(dims));
  for (auto& v : spec) v *= scale;
  return spec;
}

}  // namespace fmtk
