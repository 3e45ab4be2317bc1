#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slowfast {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;
using ConstMatRef = Eigen::Ref<const Eigen::MatrixXd>;
using MatRef = Eigen::Ref<Eigen::MatrixXd>;

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy. The CLI maps ConfigError/DomainError to exit code 2 and
// NumericError (including blow-ups and model evaluation failures) to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coefficient map returned a non-finite value; message carries the input.
struct ModelError : NumericError {
    using NumericError::NumericError;
};

// Trajectory left the finite range; last_finite_index is the last grid index
// at which every state component was still finite.
struct BlowupError : NumericError {
    BlowupError(const std::string& msg, std::size_t idx)
        : NumericError(msg), last_finite_index(idx) {}
    std::size_t last_finite_index = 0;
};

}  // namespace slowfast
