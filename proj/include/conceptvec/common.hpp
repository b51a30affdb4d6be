#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cvec {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ConceptId = std::size_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for problems that cannot be turned into a vector (no concepts,
/// no usable tokens, zero composition).
class UnembeddableError : public Error {
public:
    using Error::Error;
};

}  // namespace cvec
