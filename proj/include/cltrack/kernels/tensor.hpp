#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cltrack::kernels {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Named, contiguous view of one parameter (or gradient) tensor.
struct TensorView {
    std::string name;
    std::vector<int> shape;
    std::span<double> data;
};

inline TensorView view(std::string name, Matrix& m) {
    return {std::move(name), {static_cast<int>(m.rows()), static_cast<int>(m.cols())},
            {m.data(), static_cast<std::size_t>(m.size())}};
}

inline TensorView view(std::string name, Vector& v) {
    return {std::move(name), {static_cast<int>(v.size())},
            {v.data(), static_cast<std::size_t>(v.size())}};
}

/// Spatial feature map: tokens in row-major pixel order, one column per channel.
struct FeatureGrid {
    int height = 0;
    int width = 0;
    Matrix tokens;  // (height * width) x channels

    int channels() const { return static_cast<int>(tokens.cols()); }
    bool empty() const { return tokens.size() == 0; }
};

void require(bool ok, const char* what);
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

}  // namespace cltrack::kernels
