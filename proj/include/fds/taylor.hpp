#pragma once

#include <array>
#include <cmath>

namespace fds {

// Truncated Taylor polynomial c[0] + c[1] t + ... + c[N] t^N.
// Used to push a state along the flow of an autonomous vector field and read
// off exact time derivatives (Lie derivatives) without finite differencing.
// S = std::complex<double> gives complex-step sensitivities of the coefficients.
template <int N, class S = double>
struct Taylor {
  std::array<S, N + 1> c{};

  Taylor() = default;
  Taylor(double v) { c[0] = v; }  // NOLINT: implicit from constants on purpose

  S value() const { return c[0]; }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Taylor operator-() const {
    Taylor r;
    for (int k = 0; k <= N; ++k) r.c[k] = -c[k];
    return r;
  }
};

template <int N, class S>
Taylor<N, S> operator+(Taylor<N, S> a, const Taylor<N, S>& b) { return a += b; }
template <int N, class S>
Taylor<N, S> operator-(Taylor<N, S> a, const Taylor<N, S>& b) { return a -= b; }
template <int N, class S>
Taylor<N, S> operator+(Taylor<N, S> a, double b) { a.c[0] += b; return a; }
template <int N, class S>
Taylor<N, S> operator+(double a, Taylor<N, S> b) { b.c[0] += a; return b; }
template <int N, class S>
Taylor<N, S> operator-(Taylor<N, S> a, double b) { a.c[0] -= b; return a; }
template <int N, class S>
Taylor<N, S> operator-(double a, const Taylor<N, S>& b) { return Taylor<N, S>(a) - b; }

template <int N, class S>
Taylor<N, S> operator*(const Taylor<N, S>& a, const Taylor<N, S>& b) {
  Taylor<N, S> r;
  for (int k = 0; k <= N; ++k) {
    S s = 0.0;
    for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}
template <int N, class S>
Taylor<N, S> operator*(Taylor<N, S> a, double b) {
  for (auto& v : a.c) v *= b;
  return a;
}
template <int N, class S>
Taylor<N, S> operator*(double a, Taylor<N, S> b) { return b * a; }

template <int N, class S>
Taylor<N, S> operator/(const Taylor<N, S>& a, const Taylor<N, S>& b) {
  Taylor<N, S> q;
  for (int k = 0; k <= N; ++k) {
    S s = a.c[k];
    for (int j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
    q.c[k] = s / b.c[0];
  }
  return q;
}
template <int N, class S>
Taylor<N, S> operator/(Taylor<N, S> a, double b) {
  for (auto& v : a.c) v /= b;
  return a;
}
template <int N, class S>
Taylor<N, S> operator/(double a, const Taylor<N, S>& b) { return Taylor<N, S>(a) / b; }

template <int N, class S>
Taylor<N, S> exp(const Taylor<N, S>& a) {
  Taylor<N, S> e;
  using std::exp;
  e.c[0] = exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    S s = 0.0;
    for (int j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c[j] * e.c[k - j];
    e.c[k] = s / static_cast<double>(k);
  }
  return e;
}

// a^r for a.c[0] > 0.
template <int N, class S>
Taylor<N, S> pow(const Taylor<N, S>& a, double r) {
  Taylor<N, S> p;
  using std::pow;
  p.c[0] = pow(a.c[0], r);
  for (int k = 1; k <= N; ++k) {
    S s = 0.0;
    for (int j = 1; j <= k; ++j) s += ((r + 1.0) * j - k) * a.c[j] * p.c[k - j];
    p.c[k] = s / (static_cast<double>(k) * a.c[0]);
  }
  return p;
}

inline double value_of(double v) { return v; }
template <int N, class S>
S value_of(const Taylor<N, S>& v) { return v.c[0]; }

}  // namespace fds
