#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>

namespace dyntun::detail {

/// Unnormalised 1-D complex transforms of a fixed length. Plans are built
/// with FFTW_ESTIMATE so results are reproducible run to run; execution on
/// distinct arrays is thread-safe. Arrays passed in must come from
/// AlignedBuffer (SIMD-aligned, column stride a multiple of the alignment).
class FftPlan {
 public:
  explicit FftPlan(int n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int size() const { return n_; }
  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

/// fftw_malloc-backed complex storage.
class AlignedBuffer {
 public:
  explicit AlignedBuffer(std::size_t count);
  ~AlignedBuffer();
  AlignedBuffer(const AlignedBuffer&) = delete;
  AlignedBuffer& operator=(const AlignedBuffer&) = delete;

  std::complex<double>* data() { return data_; }

 private:
  std::complex<double>* data_;
};

}  // namespace dyntun::detail
