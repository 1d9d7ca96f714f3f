#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace intertwine {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Uniform sampling window [xmin, xmax] with `count` points (endpoints included).
struct Grid {
  double xmin = -5.0;
  double xmax = 5.0;
  int count = 201;

  std::vector<double> points() const {
    std::vector<double> xs(static_cast<std::size_t>(count));
    if (count == 1) {
      xs[0] = xmin;
      return xs;
    }
    const double step = (xmax - xmin) / (count - 1);
    for (int i = 0; i < count; ++i) xs[static_cast<std::size_t>(i)] = xmin + i * step;
    return xs;
  }
};

/// Numerical thresholds shared by every module. All determinant thresholds are
/// relative to the Hadamard bound (product of Euclidean row norms).
struct Tolerances {
  double singular_rel = 1e-12;   // numkit inverse / leading coefficient
  double wronskian_rel = 1e-10;  // kernel Wronskian on the window
  double residual = 1e-8;        // operator identity residuals (relative)
  double chain = 1e-10;          // association-chain residuals (relative)
  double zero_rel = 1e-10;       // "identically zero" image discard
  double symmetry = 1e-8;        // symmetry checks on potentials
};

}  // namespace intertwine
