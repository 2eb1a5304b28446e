#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "nlcf/curvature.hpp"

namespace nlcf {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace detail

// Discrete convolution out(n) = sum_m w(n - m) f(m) on an nx x ny grid,
// evaluated by zero-padded real FFTs of size 2nx x 2ny.  The kernel spectrum
// is fixed at construction.
class Conv2D {
 public:
  explicit Conv2D(const CellWeightTable& w)
      : nx_(w.nx()), ny_(w.ny()), px_(2 * w.nx()), py_(2 * w.ny()) {
    const std::size_t real_n = static_cast<std::size_t>(px_) * py_;
    const std::size_t spec_n = static_cast<std::size_t>(py_) * (px_ / 2 + 1);
    buf_ = fftw_alloc_real(real_n);
    spec_ = fftw_alloc_complex(spec_n);
    kspec_ = fftw_alloc_complex(spec_n);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
      fwd_ = fftw_plan_dft_r2c_2d(py_, px_, buf_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_2d(py_, px_, spec_, buf_, FFTW_ESTIMATE);
    }
    // kernel with wrap-around placement so index n receives w(n-m)
    for (std::size_t i = 0; i < real_n; ++i) buf_[i] = 0.0;
    for (int dy = -(ny_ - 1); dy <= ny_ - 1; ++dy)
      for (int dx = -(nx_ - 1); dx <= nx_ - 1; ++dx) {
        int px = dx >= 0 ? dx : dx + px_;
        int py = dy >= 0 ? dy : dy + py_;
        buf_[static_cast<std::size_t>(py) * px_ + px] = w.at(dx, dy);
      }
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < spec_n; ++i) {
      kspec_[i][0] = spec_[i][0];
      kspec_[i][1] = spec_[i][1];
    }
  }

  Conv2D(const Conv2D&) = delete;
  Conv2D& operator=(const Conv2D&) = delete;

  ~Conv2D() {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
    fftw_free(spec_);
    fftw_free(kspec_);
  }

  // f and out are nx x ny row-major
  void apply(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t real_n = static_cast<std::size_t>(px_) * py_;
    for (std::size_t i = 0; i < real_n; ++i) buf_[i] = 0.0;
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        buf_[static_cast<std::size_t>(j) * px_ + i] =
            f[static_cast<std::size_t>(j) * nx_ + i];
    fftw_execute(fwd_);
    const std::size_t spec_n = static_cast<std::size_t>(py_) * (px_ / 2 + 1);
    const double scale = 1.0 / static_cast<double>(real_n);
    for (std::size_t i = 0; i < spec_n; ++i) {
      double re = spec_[i][0] * kspec_[i][0] - spec_[i][1] * kspec_[i][1];
      double im = spec_[i][0] * kspec_[i][1] + spec_[i][1] * kspec_[i][0];
      spec_[i][0] = re * scale;
      spec_[i][1] = im * scale;
    }
    fftw_execute(bwd_);
    out.resize(static_cast<std::size_t>(nx_) * ny_);
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        out[static_cast<std::size_t>(j) * nx_ + i] =
            buf_[static_cast<std::size_t>(j) * px_ + i];
  }

 private:
  int nx_, ny_, px_, py_;
  double* buf_;
  fftw_complex* spec_;
  fftw_complex* kspec_;
  fftw_plan fwd_, bwd_;
};

}  // namespace nlcf
