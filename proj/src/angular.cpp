#include "eitnsim/angular.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace eitnsim::angular {
namespace {

constexpr int kMaxFactorial = 60;

const std::array<double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxFactorial + 1> t{};
    t[0] = 1.0;
    for (int i = 1; i <= kMaxFactorial; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}

double fact(int n) {
  if (n < 0 || n > kMaxFactorial)
    throw std::out_of_range("factorial argument out of range");
  return factorials()[n];
}

bool triangle(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && (a + b + c) % 2 == 0;
}

// Triangle coefficient Delta(abc) for doubled arguments.
double delta(int a, int b, int c) {
  return std::sqrt(fact((a + b - c) / 2) * fact((a - b + c) / 2) *
                   fact((-a + b + c) / 2) / fact((a + b + c) / 2 + 1));
}

} // namespace

double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (!triangle(j1, j2, j3)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (j3 + m3) % 2) return 0.0;

  // Racah formula, everything below in undoubled integer units.
  const int a = (j1 + j2 - j3) / 2;
  const int b = (j1 - m1) / 2;
  const int c = (j2 + m2) / 2;
  const int d = (j3 - j2 + m1) / 2;
  const int e = (j3 - j1 - m2) / 2;

  const int kmin = std::max({0, -d, -e});
  const int kmax = std::min({a, b, c});

  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double term = 1.0 / (fact(k) * fact(a - k) * fact(b - k) *
                               fact(c - k) * fact(d + k) * fact(e + k));
    sum += (k % 2 ? -term : term);
  }

  const double pref =
      delta(j1, j2, j3) *
      std::sqrt(fact((j1 + m1) / 2) * fact((j1 - m1) / 2) *
                fact((j2 + m2) / 2) * fact((j2 - m2) / 2) *
                fact((j3 + m3) / 2) * fact((j3 - m3) / 2));

  const int phase = (j1 - j2 - m3) / 2;
  return (std::abs(phase) % 2 ? -1.0 : 1.0) * pref * sum;
}

double wigner_6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) ||
      !triangle(j4, j2, j6) || !triangle(j4, j5, j3))
    return 0.0;

  const int a1 = (j1 + j2 + j3) / 2;
  const int a2 = (j1 + j5 + j6) / 2;
  const int a3 = (j4 + j2 + j6) / 2;
  const int a4 = (j4 + j5 + j3) / 2;
  const int b1 = (j1 + j2 + j4 + j5) / 2;
  const int b2 = (j2 + j3 + j5 + j6) / 2;
  const int b3 = (j3 + j1 + j6 + j4) / 2;

  const int kmin = std::max({a1, a2, a3, a4});
  const int kmax = std::min({b1, b2, b3});

  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double term =
        fact(k + 1) / (fact(k - a1) * fact(k - a2) * fact(k - a3) *
                       fact(k - a4) * fact(b1 - k) * fact(b2 - k) *
                       fact(b3 - k));
    sum += (k % 2 ? -term : term);
  }
  return delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) *
         delta(j4, j5, j3) * sum;
}

double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  const int phase = (j1 - j2 + M) / 2;
  return (std::abs(phase) % 2 ? -1.0 : 1.0) * std::sqrt(J + 1.0) *
         wigner_3j(j1, j2, J, m1, m2, -M);
}

} // namespace eitnsim::angular
