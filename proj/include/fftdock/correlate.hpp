#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fftdock/grid.hpp"

namespace fftdock {

using Complex = std::complex<double>;

// Owning buffer allocated with the FFT library's aligned allocator.
class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t size);
  ~FftBuffer();
  FftBuffer(FftBuffer&& other) noexcept;
  FftBuffer& operator=(FftBuffer&& other) noexcept;
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  Complex* data() { return data_; }
  const Complex* data() const { return data_; }
  std::size_t size() const { return size_; }
  std::span<Complex> span() { return {data_, size_}; }
  std::span<const Complex> span() const { return {data_, size_}; }

 private:
  Complex* data_ = nullptr;
  std::size_t size_ = 0;
};

// Forward and backward 3D plans for one cube edge. Plans are created once
// under a global lock; executing them on distinct buffers is thread-safe.
class Fft3d {
 public:
  explicit Fft3d(int n);
  ~Fft3d();
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;

  int n() const { return n_; }
  void forward(FftBuffer& in, FftBuffer& out) const;
  void backward(FftBuffer& in, FftBuffer& out) const;

 private:
  int n_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

// Receptor side of the correlation: spectrum evaluated at -k, so that
// multiplying with a ligand spectrum yields sum_v R(v) L(v + t).
class ReceptorSpectrum {
 public:
  ReceptorSpectrum(const DockGrid& receptor, const Fft3d& fft);
  const GridSpec& spec() const { return spec_; }
  const FftBuffer& reflected() const { return reflected_; }

 private:
  GridSpec spec_;
  FftBuffer reflected_;
};

// Per-thread scratch for repeated correlations against one receptor.
class Correlator {
 public:
  Correlator(const ReceptorSpectrum& receptor, const Fft3d& fft);

  std::span<Complex> ligand_voxels() { return ligand_.span(); }
  // Forward transform of ligand_voxels(), product with the receptor spectrum.
  void transform_and_multiply();
  // Inverse transform; writes normalized real scores into `scores`.
  void inverse(std::span<double> scores);

 private:
  const ReceptorSpectrum& receptor_;
  const Fft3d& fft_;
  FftBuffer ligand_;
  FftBuffer spectrum_;
};

// C(t) = sum_v Re[R(v) * L(v + t)] over cyclic translations t, x fastest.
std::vector<double> fft_correlate(const DockGrid& receptor, const DockGrid& ligand);

}  // namespace fftdock
