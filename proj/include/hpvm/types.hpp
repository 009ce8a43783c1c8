#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace hpvm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Linear operator form of a symmetric matrix, used when the matrix is too
// large to materialize.
using MatVec = std::function<Vector(const Vector&)>;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace audit {

// Counters for operations Algorithm 2 must not perform inside its loop.
struct Counters {
    std::uint64_t cholesky = 0;
    std::uint64_t inversion = 0;
};

inline Counters& counters() {
    static Counters c;
    return c;
}

inline void count_cholesky() { ++counters().cholesky; }
inline void count_inversion() { ++counters().inversion; }

// Snapshot/compare helper for loop audits.
struct Scope {
    Counters before;
    Scope() : before(counters()) {}
    std::uint64_t cholesky_delta() const { return counters().cholesky - before.cholesky; }
    std::uint64_t inversion_delta() const { return counters().inversion - before.inversion; }
    std::uint64_t total_delta() const { return cholesky_delta() + inversion_delta(); }
};

} // namespace audit
} // namespace hpvm
