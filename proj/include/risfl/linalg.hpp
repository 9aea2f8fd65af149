#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace risfl {

// Dense row-major matrix. Platoon graphs stay small (n <= 64), so there is no
// sparse path and no external linear-algebra dependency.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const;

    // Largest |a_ij - a_ji|; zero for an exactly symmetric matrix.
    double max_asymmetry() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi rotations for a symmetric matrix. Iterates full sweeps until
// the off-diagonal Frobenius norm falls below tol * max(1, ||A||_F); the
// relative scaling is what a 64x64 Laplacian can actually reach in doubles.
// Bit-stable across runs: no pivot search, fixed (p, q) sweep order.
EigenDecomposition jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 128);

}  // namespace risfl
