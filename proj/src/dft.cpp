#include "sdens/dft.hpp"

#include <cmath>

#include "sdens/special.hpp"

namespace sdens {

namespace {

// out[0..n) = sum_j in[j*stride] exp(sign 2 pi i j k / n), decimated in time
void fft_rec(const Cplx* in, std::size_t n, std::size_t stride, Cplx* out, double sign) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = (n % 2 == 0) ? 2 : 3;
  const std::size_t m = n / p;
  for (std::size_t s = 0; s < p; ++s) {
    fft_rec(in + s * stride, m, stride * p, out + s * m, sign);
  }
  std::vector<Cplx> sub(out, out + n);
  const double base = sign * 2.0 * kPi / static_cast<double>(n);
  for (std::size_t k0 = 0; k0 < m; ++k0) {
    Cplx t[3];
    for (std::size_t s = 0; s < p; ++s) {
      t[s] = sub[s * m + k0] * std::polar(1.0, base * static_cast<double>(s * k0));
    }
    for (std::size_t r = 0; r < p; ++r) {
      Cplx acc = 0.0;
      for (std::size_t s = 0; s < p; ++s) {
        acc += t[s] * std::polar(1.0, base * static_cast<double>(s * r * m));
      }
      out[k0 + r * m] = acc;
    }
  }
}

void require_radix23(std::size_t n) {
  if (!radix23(n)) {
    throw UnsupportedLength("transform length " + std::to_string(n) +
                            " is not of the form 2^a 3^b");
  }
}

}  // namespace

bool radix23(std::size_t n) {
  if (n == 0) return false;
  while (n % 2 == 0) n /= 2;
  while (n % 3 == 0) n /= 3;
  return n == 1;
}

std::vector<Cplx> dft(const std::vector<Cplx>& v) {
  require_radix23(v.size());
  std::vector<Cplx> out(v.size());
  fft_rec(v.data(), v.size(), 1, out.data(), -1.0);
  const double inv = 1.0 / static_cast<double>(v.size());
  for (Cplx& c : out) c *= inv;
  return out;
}

std::vector<Cplx> idft(const std::vector<Cplx>& vhat) {
  require_radix23(vhat.size());
  std::vector<Cplx> out(vhat.size());
  fft_rec(vhat.data(), vhat.size(), 1, out.data(), 1.0);
  return out;
}

std::vector<Cplx> zero_pad_modes(const std::vector<Cplx>& vhat, std::size_t m) {
  const std::size_t n = vhat.size();
  if (m < n) throw UnsupportedLength("zero padding cannot shrink the mode vector");
  std::vector<Cplx> out(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k < n) {
      out[k] += vhat[k];
    } else if (2 * k > n) {
      out[k + m - n] += vhat[k];
    } else {  // Nyquist of an even length: split half-half to keep real data real
      out[k] += 0.5 * vhat[k];
      out[k + m - n] += 0.5 * vhat[k];
    }
  }
  return out;
}

}  // namespace sdens
