#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the recursion, observables or ED code under test.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// All occupation vectors of `levels` modes with total `n` (fermions: 0/1 only).
inline std::vector<std::vector<int>> configurations(int levels, int n, bool fermion) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(levels, 0);
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == levels - 1) {
      if (fermion && left > 1) return;
      cur[k] = left;
      out.push_back(cur);
      return;
    }
    const int top = fermion ? std::min(left, 1) : left;
    for (int v = 0; v <= top; ++v) {
      cur[k] = v;
      rec(k + 1, left - v);
    }
    cur[k] = 0;
  };
  if (levels == 0) {
    if (n == 0) out.push_back({});
    return out;
  }
  rec(0, n);
  return out;
}

struct Moments {
  cplx Z = 0.0;
  Eigen::VectorXcd n, n2;
  Eigen::MatrixXcd nn;
};

// Z_N = sum over configurations of prod mu^n, and weighted moments.
inline Moments enumerate(const Eigen::VectorXcd& mu, int N, bool fermion) {
  const int g = static_cast<int>(mu.size());
  Moments m;
  m.n = Eigen::VectorXcd::Zero(g);
  m.n2 = Eigen::VectorXcd::Zero(g);
  m.nn = Eigen::MatrixXcd::Zero(g, g);
  for (const auto& c : configurations(g, N, fermion)) {
    cplx w = 1.0;
    for (int k = 0; k < g; ++k)
      for (int r = 0; r < c[k]; ++r) w *= mu(k);
    m.Z += w;
    for (int a = 0; a < g; ++a) {
      m.n(a) += w * double(c[a]);
      m.n2(a) += w * double(c[a] * c[a]);
      for (int b = 0; b < g; ++b)
        if (a != b) m.nn(a, b) += w * double(c[a] * c[b]);
    }
  }
  m.n /= m.Z;
  m.n2 /= m.Z;
  m.nn /= m.Z;
  return m;
}

// Coefficients of prod (1 + mu x): e_0..e_G.
inline Eigen::VectorXcd elementary(const Eigen::VectorXcd& mu) {
  const int g = static_cast<int>(mu.size());
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(g + 1);
  e(0) = 1.0;
  for (int k = 0; k < g; ++k)
    for (int j = k + 1; j >= 1; --j) e(j) += mu(k) * e(j - 1);
  return e;
}

// Coefficients of prod 1 / (1 - mu x) up to x^N.
inline Eigen::VectorXcd complete(const Eigen::VectorXcd& mu, int N) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(N + 1);
  h(0) = 1.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k)
    for (int j = 1; j <= N; ++j) h(j) += mu(k) * h(j - 1);
  return h;
}

inline cplx permanent(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  std::vector<int> p(n);
  for (int k = 0; k < n; ++k) p[k] = k;
  cplx sum = 0.0;
  do {
    cplx t = 1.0;
    for (int k = 0; k < n; ++k) t *= a(k, p[k]);
    sum += t;
  } while (std::next_permutation(p.begin(), p.end()));
  return sum;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Many-body image Gamma(M) of a one-body matrix on the fixed-N Fock space,
// together with the site-occupation basis it is expressed in.
struct FockImage {
  std::vector<std::vector<int>> states;
  Eigen::MatrixXcd matrix;
};

inline std::vector<int> expand(const std::vector<int>& occ) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(occ.size()); ++i)
    for (int r = 0; r < occ[i]; ++r) idx.push_back(i);
  return idx;
}

inline FockImage fock_image(const Eigen::MatrixXcd& M, int N, bool fermion) {
  FockImage f;
  f.states = configurations(static_cast<int>(M.rows()), N, fermion);
  const auto d = static_cast<Eigen::Index>(f.states.size());
  f.matrix.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto ra = expand(f.states[a]);
    for (Eigen::Index b = 0; b < d; ++b) {
      const auto cb = expand(f.states[b]);
      Eigen::MatrixXcd sub(N, N);
      for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) sub(r, c) = M(ra[r], cb[c]);
      if (fermion) {
        f.matrix(a, b) = N == 0 ? cplx(1.0) : sub.determinant();
      } else {
        double norm = 1.0;
        for (int v : f.states[a]) norm *= factorial(v);
        for (int v : f.states[b]) norm *= factorial(v);
        f.matrix(a, b) = permanent(sub) / std::sqrt(norm);
      }
    }
  }
  return f;
}

// <a+_i a_j> matrix elements between occupation states (single species).
inline cplx hop_element(const std::vector<int>& bra, const std::vector<int>& ket, int i, int j, bool fermion) {
  std::vector<int> s = ket;
  if (s[j] == 0) return 0.0;
  double amp = std::sqrt(double(s[j]));
  double sign = 1.0;
  if (fermion)
    for (int k = 0; k < j; ++k)
      if (s[k]) sign = -sign;
  --s[j];
  if (fermion && s[i] == 1) return 0.0;
  if (fermion)
    for (int k = 0; k < i; ++k)
      if (s[k]) sign = -sign;
  amp *= std::sqrt(double(s[i] + 1));
  ++s[i];
  return s == bra ? cplx(sign * amp) : cplx(0.0);
}

struct FockObservables {
  cplx Z = 0.0;
  Eigen::MatrixXcd d1;  // <a+_i a_j>
  Eigen::VectorXcd n2;  // <n_i^2>
};

// Traces with Gamma(M) for a single species.
inline FockObservables fock_observables(const Eigen::MatrixXcd& M, int N, bool fermion) {
  const FockImage f = fock_image(M, N, fermion);
  const int ns = static_cast<int>(M.rows());
  const auto d = static_cast<Eigen::Index>(f.states.size());
  FockObservables o;
  o.Z = f.matrix.trace();
  o.d1 = Eigen::MatrixXcd::Zero(ns, ns);
  o.n2 = Eigen::VectorXcd::Zero(ns);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      cplx tr = 0.0;
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
          const cplx h = hop_element(f.states[b], f.states[a], i, j, fermion);
          if (h != cplx(0.0)) tr += f.matrix(a, b) * h;  // Tr[Gamma O] = sum_ab Gamma_ab O_ba
        }
      o.d1(i, j) = tr / o.Z;
    }
  for (int i = 0; i < ns; ++i) {
    cplx tr = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) tr += f.matrix(a, a) * double(f.states[a][i] * f.states[a][i]);
    o.n2(i) = tr / o.Z;
  }
  return o;
}

// Two independent fermion sectors: Z and <n_i,up n_i,down> summed over the
// product basis.
inline std::pair<cplx, Eigen::VectorXcd> spinful_doublon(const Eigen::MatrixXcd& Mu, int nu,
                                                          const Eigen::MatrixXcd& Md, int nd) {
  const FockImage fu = fock_image(Mu, nu, true);
  const FockImage fd = fock_image(Md, nd, true);
  const int ns = static_cast<int>(Mu.rows());
  cplx Z = 0.0;
  Eigen::VectorXcd dbl = Eigen::VectorXcd::Zero(ns);
  for (std::size_t a = 0; a < fu.states.size(); ++a)
    for (std::size_t b = 0; b < fd.states.size(); ++b) {
      const cplx w = fu.matrix(a, a) * fd.matrix(b, b);
      Z += w;
      for (int i = 0; i < ns; ++i) dbl(i) += w * double(fu.states[a][i] * fd.states[b][i]);
    }
  return {Z, dbl / Z};
}

}  // namespace oracle
