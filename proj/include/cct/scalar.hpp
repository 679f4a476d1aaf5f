// scalar.hpp
//
// Arithmetic kernel shared by every module: the two scalar modes (binary64
// and exact rationals), compensated summation, exact binomials, and the
// library error type.
#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace cct {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Tolerance used for every float-mode equality and mass check.
inline constexpr double kTolerance = 1e-12;

enum class ErrorCode {
    EmptyVector,
    NonPositiveEntry,
    EntryAtLeastOne,
    MassExceedsOne,
    DegenerateNullMass,
    LengthMismatch,
    MassMismatch,
    IndexOutOfRange,
    LambdaOutOfRange,
    NotInFamily,
    InvalidTheta,
    InvalidC,
    InvalidDelta,
    WorkloadExceeded,
    TailRateOne,
    InsufficientTruncation,
    TooFewSamples,
    ConfigInvalid,
    ParseError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::EntryAtLeastOne: return "EntryAtLeastOne";
    case ErrorCode::MassExceedsOne: return "MassExceedsOne";
    case ErrorCode::DegenerateNullMass: return "DegenerateNullMass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::NotInFamily: return "NotInFamily";
    case ErrorCode::InvalidTheta: return "InvalidTheta";
    case ErrorCode::InvalidC: return "InvalidC";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::WorkloadExceeded: return "WorkloadExceeded";
    case ErrorCode::TailRateOne: return "TailRateOne";
    case ErrorCode::InsufficientTruncation: return "InsufficientTruncation";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Domain error raised by every operation in the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

template <Scalar T>
inline constexpr bool is_exact_v = std::same_as<T, Rational>;

/// Equality slack for the mode: 1e-12 for doubles, none for rationals.
template <Scalar T>
T tolerance() {
    if constexpr (is_exact_v<T>) return T(0);
    else return kTolerance;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

template <Scalar T>
T from_double(double x) {
    // mpq_rational converts binary64 values exactly.
    return T(x);
}

/// x^k by repeated squaring; exact for rationals.
template <Scalar T>
T ipow(const T& base, std::uint64_t k) {
    if constexpr (!is_exact_v<T>) {
        return std::pow(base, static_cast<double>(k));
    } else {
        T result(1);
        T b = base;
        while (k != 0) {
            if (k & 1U) result *= b;
            k >>= 1U;
            if (k != 0) b *= b;
        }
        return result;
    }
}

/// Binomial coefficient C(n, k) in exact integer arithmetic; 0 when k > n.
inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return BigInt(0);
    if (k > n - k) k = n - k;
    BigInt r(1);
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

/// Binomial coefficient as a double; saturates to +inf past the double range.
inline double binomial_d(std::uint64_t n, std::uint64_t k) {
    return binomial(n, k).convert_to<double>();
}

template <Scalar T>
T binomial_as(std::uint64_t n, std::uint64_t k) {
    if constexpr (is_exact_v<T>) return T(binomial(n, k));
    else return binomial_d(n, k);
}

/// Running sum. Doubles use Neumaier's compensated summation so that the
/// alternating inclusion-exclusion layers do not lose the small result to
/// cancellation; rationals add exactly.
template <Scalar T>
class Accumulator {
public:
    void add(const T& x) {
        if constexpr (is_exact_v<T>) {
            sum_ += x;
        } else {
            const double t = sum_ + x;
            if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
            else comp_ += (x - t) + sum_;
            sum_ = t;
        }
    }

    Accumulator& operator+=(const T& x) {
        add(x);
        return *this;
    }

    T value() const {
        if constexpr (is_exact_v<T>) return sum_;
        else return sum_ + comp_;
    }

private:
    T sum_{0};
    T comp_{0};
};

}  // namespace cct
