#include "bmp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "bmp/errors.hpp"
#include "bmp/kernels.hpp"

namespace bmp::spectral {

namespace {

Eigen::MatrixXd to_eigen(const linalg::Matrix& a) {
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    return m;
}

/// Strong connectivity of the nonnegative off-diagonal support of a.
bool strongly_connected(const linalg::Matrix& a) {
    const std::size_t n = a.rows();
    auto reach = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            for (std::size_t y = 0; y < n; ++y) {
                if (y == x || seen[y]) continue;
                const double w = forward ? a(x, y) : a(y, x);
                if (w != 0.0) {
                    seen[y] = true;
                    stack.push_back(y);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(true) && reach(false);
}

struct DominantPair {
    double lambda;
    Eigen::VectorXd vec;
    double second_real;  // max real part among the other eigenvalues
    bool has_second;
};

DominantPair dominant_real_pair(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) fail(errkind::kInvariant, "eigensolver failed to converge");
    const auto& values = solver.eigenvalues();
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values[i].real() > values[lead].real()) lead = i;
    }
    const std::complex<double> lambda_c = values[lead];
    const double tol = 1e-8 * (1.0 + std::abs(lambda_c));
    if (std::fabs(lambda_c.imag()) > tol) {
        fail(errkind::kNonSimpleLeading, "leading eigenvalue has nonzero imaginary part");
    }
    DominantPair out;
    out.lambda = lambda_c.real();
    out.has_second = values.size() > 1;
    out.second_real = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (i == lead) continue;
        if (std::abs(values[i] - lambda_c) < tol) {
            fail(errkind::kNonSimpleLeading, "leading eigenvalue is not simple");
        }
        out.second_real = std::max(out.second_real, values[i].real());
    }
    // eigenvectors() returns by value; materialize the column before the
    // temporary matrix goes out of scope.
    const Eigen::VectorXcd col = solver.eigenvectors().col(lead);
    out.vec.resize(col.size());
    for (Eigen::Index i = 0; i < col.size(); ++i) out.vec[i] = col[i].real();
    return out;
}

}  // namespace

SpectralData compute_eigendata(const linalg::Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) fail(errkind::kInvariant, "eigendata needs a square matrix");
    if (!strongly_connected(a)) {
        fail(errkind::kReducible, "mean generator is reducible (off-diagonal support not strongly connected)");
    }

    SpectralData sd;
    if (n == 1) {
        sd.lambda = a(0, 0);
        sd.phi = {1.0};
        sd.phi_tilde = {1.0};
        sd.supercritical = sd.lambda > 0.0;
        return sd;
    }

    const Eigen::MatrixXd m = to_eigen(a);
    DominantPair right = dominant_real_pair(m);
    DominantPair left = dominant_real_pair(m.transpose());
    if (std::fabs(right.lambda - left.lambda) > 1e-8 * (1.0 + std::fabs(right.lambda))) {
        fail(errkind::kInvariant, "left and right leading eigenvalues disagree");
    }
    sd.lambda = right.lambda;
    sd.spectral_gap = sd.lambda - right.second_real;
    sd.supercritical = sd.lambda > 0.0;

    // Perron vectors have one sign; flip to positive and reject otherwise.
    auto to_positive = [](Eigen::VectorXd& v, const char* side) {
        double sum = v.sum();
        if (sum < 0.0) v = -v;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (v[i] <= 0.0) {
                fail(errkind::kInvariant,
                     std::string("computed ") + side + " eigenvector is not strictly positive");
            }
        }
    };
    to_positive(right.vec, "right");
    to_positive(left.vec, "left");

    // Normalize: phi_tilde to a probability vector, then phi against it.
    left.vec /= left.vec.sum();
    right.vec /= left.vec.dot(right.vec);
    sd.phi.assign(right.vec.data(), right.vec.data() + n);
    sd.phi_tilde.assign(left.vec.data(), left.vec.data() + n);

    const double scale = linalg::norminf(a) * linalg::norminf(sd.phi);
    linalg::Vector r = linalg::matvec(a, sd.phi);
    for (std::size_t i = 0; i < n; ++i) r[i] -= sd.lambda * sd.phi[i];
    sd.right_residual = linalg::norminf(r) / (scale > 0.0 ? scale : 1.0);

    const double lscale = linalg::norminf(a) * linalg::norminf(sd.phi_tilde);
    linalg::Vector l = linalg::matvec(linalg::transpose(a), sd.phi_tilde);
    for (std::size_t i = 0; i < n; ++i) l[i] -= sd.lambda * sd.phi_tilde[i];
    sd.left_residual = linalg::norminf(l) / (lscale > 0.0 ? lscale : 1.0);

    if (sd.right_residual > 1e-10 || sd.left_residual > 1e-10) {
        fail(errkind::kInvariant, "eigenpair residual exceeds 1e-10");
    }
    return sd;
}

double max_real_eigenvalue(const linalg::Matrix& a) {
    if (a.rows() == 1) return a(0, 0);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(a), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) fail(errkind::kInvariant, "eigensolver failed to converge");
    double best = -std::numeric_limits<double>::infinity();
    const auto& values = solver.eigenvalues();
    for (Eigen::Index i = 0; i < values.size(); ++i) best = std::max(best, values[i].real());
    return best;
}

linalg::Vector semigroup_apply(const linalg::Matrix& a, double t, const linalg::Vector& f) {
    if (t < 0.0) fail(errkind::kInvariant, "semigroup time must be >= 0");
    if (t > 0.0) {
        const double lambda = max_real_eigenvalue(a);
        if (lambda * t > 700.0) {
            fail(errkind::kOverflow, "semigroup horizon overflows doubles (lambda * t > 700); rescale time");
        }
    }
    return linalg::matvec(linalg::expm(t * a), f);
}

double h1_gap(const linalg::Matrix& a, const SpectralData& sd, double t) {
    const std::size_t n = a.rows();
    const linalg::Matrix e = linalg::expm(t * a);
    const double damp = std::exp(-sd.lambda * t);
    double worst = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        double row = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            row += std::fabs(damp * e(x, y) / sd.phi[x] - sd.phi_tilde[y]);
        }
        worst = std::max(worst, row);
    }
    return worst;
}

}  // namespace bmp::spectral
