#ifndef GPR_DSP_HPP
#define GPR_DSP_HPP

#include <complex>
#include <vector>

namespace gpr::dsp {

/// In-place complex FFT for any length n >= 1 (radix-2 with a Bluestein
/// fallback for non-power-of-two lengths). The inverse includes the 1/n factor.
void fft(std::vector<std::complex<double>>& x, bool inverse = false);

/// Analytic signal via the frequency-domain construction: zero the negative
/// frequencies, double the positive ones, keep DC (and Nyquist) unchanged.
std::vector<std::complex<double>> analytic_signal(const std::vector<double>& x);

/// Magnitude of the analytic signal.
std::vector<double> envelope(const std::vector<double>& x);

}  // namespace gpr::dsp

#endif  // GPR_DSP_HPP
