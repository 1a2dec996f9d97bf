#include "fftdock/correlate.hpp"

#include <fftw3.h>

#include <mutex>
#include <utility>

#include "fftdock/errors.hpp"

namespace fftdock {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftBuffer::FftBuffer(std::size_t size)
    : data_(static_cast<Complex*>(fftw_malloc(sizeof(Complex) * size))), size_(size) {
  if (!data_ && size) throw std::bad_alloc();
}

FftBuffer::~FftBuffer() { fftw_free(data_); }

FftBuffer::FftBuffer(FftBuffer&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}

FftBuffer& FftBuffer::operator=(FftBuffer&& other) noexcept {
  if (this != &other) {
    fftw_free(data_);
    data_ = std::exchange(other.data_, nullptr);
    size_ = std::exchange(other.size_, 0);
  }
  return *this;
}

Fft3d::Fft3d(int n) : n_(n) {
  const std::size_t size = std::size_t(n) * n * n;
  FftBuffer a(size), b(size);
  std::lock_guard lock(planner_mutex());
  // FFTW is row-major with the last index fastest, so (z, y, x) maps onto
  // our x-fastest layout.
  forward_plan_ = fftw_plan_dft_3d(n, n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_3d(n, n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !backward_plan_) throw Error("FFT planning failed for n=" + std::to_string(n));
}

Fft3d::~Fft3d() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Fft3d::forward(FftBuffer& in, FftBuffer& out) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

void Fft3d::backward(FftBuffer& in, FftBuffer& out) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

ReceptorSpectrum::ReceptorSpectrum(const DockGrid& receptor, const Fft3d& fft) : spec_(receptor.spec) {
  const int n = spec_.n;
  if (fft.n() != n) throw ShapeError("transform size does not match the receptor grid");
  const std::size_t size = spec_.voxel_count();
  FftBuffer in(size), spectrum(size);
  std::copy(receptor.voxels.begin(), receptor.voxels.end(), in.data());
  fft.forward(in, spectrum);

  // sum_v R(v) L(v + t) = IDFT[ F[R](-k) * F[L](k) ](t)
  reflected_ = FftBuffer(size);
  for (int kz = 0; kz < n; ++kz) {
    const int mz = (n - kz) % n;
    for (int ky = 0; ky < n; ++ky) {
      const int my = (n - ky) % n;
      for (int kx = 0; kx < n; ++kx) {
        const int mx = (n - kx) % n;
        reflected_.data()[spec_.index(kx, ky, kz)] = spectrum.data()[spec_.index(mx, my, mz)];
      }
    }
  }
}

Correlator::Correlator(const ReceptorSpectrum& receptor, const Fft3d& fft)
    : receptor_(receptor), fft_(fft), ligand_(receptor.spec().voxel_count()), spectrum_(receptor.spec().voxel_count()) {}

void Correlator::transform_and_multiply() {
  fft_.forward(ligand_, spectrum_);
  const Complex* r = receptor_.reflected().data();
  Complex* s = spectrum_.data();
  const std::size_t size = spectrum_.size();
#pragma omp simd
  for (std::size_t i = 0; i < size; ++i) s[i] *= r[i];
}

void Correlator::inverse(std::span<double> scores) {
  // ligand_ is free scratch at this point
  fft_.backward(spectrum_, ligand_);
  const double scale = 1.0 / static_cast<double>(ligand_.size());
  const Complex* c = ligand_.data();
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = c[i].real() * scale;
}

std::vector<double> fft_correlate(const DockGrid& receptor, const DockGrid& ligand) {
  if (!(receptor.spec == ligand.spec)) throw ShapeError("receptor and ligand grids have different specs");
  if (receptor.spec.n < 1) throw ShapeError("empty grid");
  if (receptor.voxels.size() != receptor.spec.voxel_count() || ligand.voxels.size() != ligand.spec.voxel_count())
    throw ShapeError("grid storage does not match its spec");
  Fft3d fft(receptor.spec.n);
  ReceptorSpectrum rs(receptor, fft);
  Correlator corr(rs, fft);
  std::copy(ligand.voxels.begin(), ligand.voxels.end(), corr.ligand_voxels().begin());
  corr.transform_and_multiply();
  std::vector<double> scores(receptor.spec.voxel_count());
  corr.inverse(scores);
  return scores;
}

}  // namespace fftdock
