#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Discrete Fourier transforms on lengths of the form 2^a 3^b, evaluated by
// recursive decimation. The forward transform carries the 1/N factor,
//   vhat_k = (1/N) sum_j v_j exp(-2 pi i j k / N),
// and the inverse carries none, so idft(dft(v)) == v and Parseval reads
//   sum |v_j|^2 = N sum |vhat_k|^2.
// zero_pad_modes embeds a mode vector into a longer one so that the inverse
// transform of the result is the trigonometric interpolant of the original
// samples; an even length's top mode is split half-half to keep real data
// real.

namespace sdens {

using Cplx = std::complex<double>;

struct UnsupportedLength : std::invalid_argument {
  explicit UnsupportedLength(const std::string& what) : std::invalid_argument(what) {}
};

// true when n = 2^a 3^b with n >= 1
bool radix23(std::size_t n);

std::vector<Cplx> dft(const std::vector<Cplx>& v);
std::vector<Cplx> idft(const std::vector<Cplx>& vhat);

// Embed N modes into m >= N slots: k < N/2 keeps its index, k > N/2 moves to
// k + m - N, and for even N the mode at N/2 contributes half to each image.
std::vector<Cplx> zero_pad_modes(const std::vector<Cplx>& vhat, std::size_t m);

}  // namespace sdens
