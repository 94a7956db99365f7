#include "resetloop/matrix_exp.hpp"

#include <array>
#include <cmath>

#include "resetloop/errors.hpp"

namespace resetloop {
namespace {

constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                           30270240.0,    2162160.0,    110880.0,     3960.0,
                                           90.0,          1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norm for which the degree-m approximant meets unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

double norm1(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

template <std::size_t N>
Eigen::MatrixXd pade_low(const Eigen::MatrixXd& a, const std::array<double, N>& b) {
  const auto n = a.rows();
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  Eigen::MatrixXd power = ident;
  Eigen::MatrixXd u_even = b[1] * ident;
  Eigen::MatrixXd v = b[0] * ident;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 < N) u_even += b[k + 1] * power;
  }
  const Eigen::MatrixXd u = a * u_even;
  return (v - u).partialPivLu().solve(v + u);
}

Eigen::MatrixXd pade13(const Eigen::MatrixXd& a) {
  const auto& b = kPade13;
  const auto n = a.rows();
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
           b[1] * ident);
  const Eigen::MatrixXd v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("expm: matrix must be square");
  if (a.size() == 0) return a;
  if (!a.allFinite()) throw NumericalError("expm: non-finite matrix entry");

  const double norm = norm1(a);
  if (norm <= kTheta3) return pade_low(a, kPade3);
  if (norm <= kTheta5) return pade_low(a, kPade5);
  if (norm <= kTheta7) return pade_low(a, kPade7);
  if (norm <= kTheta9) return pade_low(a, kPade9);

  int squarings = 0;
  if (norm > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
  Eigen::MatrixXd result = pade13(a / std::ldexp(1.0, squarings));
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (a.cols() != n) throw InputError("balancing_scales: matrix must be square");
  Eigen::MatrixXd work = a;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double kRadix = 2.0;
  for (int sweep = 0, converged = 0; !converged && sweep < 200; ++sweep) {
    converged = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = work.col(i).cwiseAbs().sum() - std::abs(work(i, i));
      const double r = work.row(i).cwiseAbs().sum() - std::abs(work(i, i));
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      double cc = c;
      const double s = c + r;
      while (cc < r / kRadix) {
        cc *= kRadix * kRadix;
        f *= kRadix;
      }
      while (cc >= r * kRadix) {
        cc /= kRadix * kRadix;
        f /= kRadix;
      }
      if ((c * f + r / f) < 0.95 * s) {
        converged = 0;
        d(i) *= f;
        work.col(i) *= f;
        work.row(i) /= f;
      }
    }
  }
  return d;
}

ZohDiscretization zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
  const auto n = a.rows();
  const auto m = b.cols();
  if (a.cols() != n || b.rows() != n) throw InputError("zoh_discretize: dimension mismatch");
  if (!(dt > 0.0)) throw InputError("zoh_discretize: dt must be positive");
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + m, n + m);
  augmented.topLeftCorner(n, n) = a * dt;
  augmented.topRightCorner(n, m) = b * dt;
  const Eigen::MatrixXd e = expm(augmented);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace resetloop
