#pragma once

// Composite Hilbert spaces, pure states and dense operators.
//
// Basis indices use mixed-radix encoding with the first-listed subsystem as
// the most significant digit, so that tensor(A, B, C) follows ket order
// |a, b, c>.  All values are immutable after construction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace klm {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;

enum class SubsystemKind { qubit, qutrit, mode };

/// Qutrit levels. The two ground levels |i>, |g> carry qubit information.
enum class Level : std::size_t { i = 0, g = 1, e = 2 };

inline char level_name(Level l) {
    switch (l) {
    case Level::i: return 'i';
    case Level::g: return 'g';
    case Level::e: return 'e';
    }
    return '?';
}

struct Subsystem {
    std::string label;
    std::size_t dim = 0;
    SubsystemKind kind = SubsystemKind::mode;

    bool operator==(const Subsystem&) const = default;
};

inline Subsystem qutrit(std::string label) { return {std::move(label), 3, SubsystemKind::qutrit}; }
inline Subsystem qubit(std::string label) { return {std::move(label), 2, SubsystemKind::qubit}; }
/// Bosonic mode truncated at `cutoff` excitations (dimension cutoff + 1).
inline Subsystem mode(std::string label, std::size_t cutoff) {
    return {std::move(label), cutoff + 1, SubsystemKind::mode};
}

class SpaceLayout {
public:
    SpaceLayout() = default;

    explicit SpaceLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
        for (std::size_t k = 0; k < subsystems_.size(); ++k) {
            const auto& s = subsystems_[k];
            if (s.label.empty())
                throw std::invalid_argument("SpaceLayout: empty subsystem label");
            if (s.dim < 2)
                throw std::invalid_argument("SpaceLayout: subsystem '" + s.label + "' needs dim >= 2");
            if (s.kind == SubsystemKind::qutrit && s.dim != 3)
                throw std::invalid_argument("SpaceLayout: qutrit '" + s.label + "' must have dim 3");
            if (s.kind == SubsystemKind::qubit && s.dim != 2)
                throw std::invalid_argument("SpaceLayout: qubit '" + s.label + "' must have dim 2");
            for (std::size_t j = 0; j < k; ++j)
                if (subsystems_[j].label == s.label)
                    throw std::invalid_argument("SpaceLayout: duplicate label '" + s.label + "'");
        }
    }

    SpaceLayout(std::initializer_list<Subsystem> subsystems)
        : SpaceLayout(std::vector<Subsystem>(subsystems)) {}

    const std::vector<Subsystem>& subsystems() const { return subsystems_; }
    std::size_t size() const { return subsystems_.size(); }
    bool empty() const { return subsystems_.empty(); }

    std::size_t dimension() const {
        std::size_t d = 1;
        for (const auto& s : subsystems_) d *= s.dim;
        return d;
    }

    bool contains(const std::string& label) const {
        return std::any_of(subsystems_.begin(), subsystems_.end(),
                           [&](const Subsystem& s) { return s.label == label; });
    }

    std::size_t position(const std::string& label) const {
        for (std::size_t k = 0; k < subsystems_.size(); ++k)
            if (subsystems_[k].label == label) return k;
        throw std::invalid_argument("SpaceLayout: unknown subsystem '" + label + "'");
    }

    const Subsystem& at(const std::string& label) const { return subsystems_[position(label)]; }

    std::size_t encode(std::span<const std::size_t> digits) const {
        if (digits.size() != subsystems_.size())
            throw std::invalid_argument("SpaceLayout::encode: digit count mismatch");
        std::size_t index = 0;
        for (std::size_t k = 0; k < digits.size(); ++k) {
            if (digits[k] >= subsystems_[k].dim)
                throw std::invalid_argument("SpaceLayout::encode: digit out of range for '" +
                                            subsystems_[k].label + "'");
            index = index * subsystems_[k].dim + digits[k];
        }
        return index;
    }

    std::size_t encode(std::initializer_list<std::size_t> digits) const {
        return encode(std::span<const std::size_t>(digits.begin(), digits.size()));
    }

    std::vector<std::size_t> decode(std::size_t index) const {
        std::vector<std::size_t> digits(subsystems_.size());
        for (std::size_t k = subsystems_.size(); k-- > 0;) {
            digits[k] = index % subsystems_[k].dim;
            index /= subsystems_[k].dim;
        }
        return digits;
    }

    /// Ket label such as "|e,1,0>" (qutrits print i/g/e, modes print photon number).
    std::string basis_label(std::size_t index) const {
        const auto digits = decode(index);
        std::ostringstream out;
        out << '|';
        for (std::size_t k = 0; k < digits.size(); ++k) {
            if (k) out << ',';
            if (subsystems_[k].kind == SubsystemKind::qutrit)
                out << level_name(static_cast<Level>(digits[k]));
            else
                out << digits[k];
        }
        out << '>';
        return out.str();
    }

    SpaceLayout concat(const SpaceLayout& other) const {
        auto all = subsystems_;
        all.insert(all.end(), other.subsystems_.begin(), other.subsystems_.end());
        return SpaceLayout(std::move(all));
    }

    bool operator==(const SpaceLayout&) const = default;

private:
    std::vector<Subsystem> subsystems_;
};

inline void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": layout mismatch");
}

class StateVector {
public:
    StateVector(SpaceLayout layout, CVector amplitudes)
        : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amps_.size()) != layout_.dimension())
            throw std::invalid_argument("StateVector: amplitude count does not match layout dimension");
    }

    static StateVector basis(SpaceLayout layout, std::initializer_list<std::size_t> digits) {
        const auto idx = layout.encode(digits);
        return basis_index(std::move(layout), idx);
    }

    static StateVector basis_index(SpaceLayout layout, std::size_t index) {
        CVector v = CVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
        if (index >= layout.dimension()) throw std::invalid_argument("StateVector: basis index out of range");
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return {std::move(layout), std::move(v)};
    }

    const SpaceLayout& layout() const { return layout_; }
    const CVector& amplitudes() const { return amps_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }

    Complex operator[](std::size_t index) const { return amps_(static_cast<Eigen::Index>(index)); }
    Complex amplitude(std::initializer_list<std::size_t> digits) const { return (*this)[layout_.encode(digits)]; }

    double norm() const { return amps_.norm(); }

    StateVector normalized() const {
        const double n = norm();
        if (!(n > 0.0)) throw std::invalid_argument("StateVector::normalized: zero-norm state");
        return {layout_, amps_ / n};
    }

    bool is_normalized(double tol = kNormTolerance) const { return std::abs(norm() - 1.0) < tol; }

private:
    SpaceLayout layout_;
    CVector amps_;
};

class DenseOperator {
public:
    DenseOperator(SpaceLayout layout, CMatrix entries, bool hermitian_hint = false)
        : layout_(std::move(layout)), mat_(std::move(entries)), hermitian_(hermitian_hint) {
        const auto d = static_cast<Eigen::Index>(layout_.dimension());
        if (mat_.rows() != d || mat_.cols() != d)
            throw std::invalid_argument("DenseOperator: matrix shape does not match layout dimension");
        if (hermitian_ && (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() >= kHermitianTolerance)
            throw std::invalid_argument("DenseOperator: hermitian_hint set on a non-Hermitian matrix");
    }

    static DenseOperator identity(SpaceLayout layout) {
        const auto d = static_cast<Eigen::Index>(layout.dimension());
        return {std::move(layout), CMatrix::Identity(d, d), true};
    }

    static DenseOperator zero(SpaceLayout layout) {
        const auto d = static_cast<Eigen::Index>(layout.dimension());
        return {std::move(layout), CMatrix::Zero(d, d), true};
    }

    const SpaceLayout& layout() const { return layout_; }
    const CMatrix& matrix() const { return mat_; }
    bool hermitian_hint() const { return hermitian_; }
    std::size_t dimension() const { return static_cast<std::size_t>(mat_.rows()); }

    Complex operator()(std::size_t row, std::size_t col) const {
        return mat_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    DenseOperator adjoint() const { return {layout_, mat_.adjoint(), hermitian_}; }

    StateVector apply(const StateVector& psi) const {
        require_same_layout(layout_, psi.layout(), "DenseOperator::apply");
        return {layout_, mat_ * psi.amplitudes()};
    }

    friend DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
        require_same_layout(a.layout_, b.layout_, "operator+");
        return {a.layout_, a.mat_ + b.mat_, a.hermitian_ && b.hermitian_};
    }
    friend DenseOperator operator-(const DenseOperator& a, const DenseOperator& b) {
        require_same_layout(a.layout_, b.layout_, "operator-");
        return {a.layout_, a.mat_ - b.mat_, a.hermitian_ && b.hermitian_};
    }
    friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
        require_same_layout(a.layout_, b.layout_, "operator*");
        return {a.layout_, a.mat_ * b.mat_, false};
    }
    friend DenseOperator operator*(double s, const DenseOperator& a) {
        return {a.layout_, s * a.mat_, a.hermitian_};
    }
    friend DenseOperator operator*(Complex s, const DenseOperator& a) {
        return {a.layout_, s * a.mat_, a.hermitian_ && s.imag() == 0.0};
    }

private:
    SpaceLayout layout_;
    CMatrix mat_;
    bool hermitian_ = false;
};

/// Max-abs-entry distance between two operators of the same layout.
inline double max_abs_diff(const DenseOperator& a, const DenseOperator& b) {
    require_same_layout(a.layout(), b.layout(), "max_abs_diff");
    if (a.dimension() == 0) return 0.0;
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline bool is_unitary(const CMatrix& u, double tol) {
    const auto d = u.rows();
    return (u.adjoint() * u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < tol;
}

// ---------------------------------------------------------------------------
// tensor

inline StateVector tensor(std::span<const StateVector> factors) {
    if (factors.empty()) throw std::invalid_argument("tensor: empty factor list");
    SpaceLayout layout = factors.front().layout();
    CVector amps = factors.front().amplitudes();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        layout = layout.concat(factors[k].layout());
        CVector next = Eigen::kroneckerProduct(amps, factors[k].amplitudes()).eval();
        amps = std::move(next);
    }
    return {std::move(layout), std::move(amps)};
}

inline DenseOperator tensor(std::span<const DenseOperator> factors) {
    if (factors.empty()) throw std::invalid_argument("tensor: empty factor list");
    SpaceLayout layout = factors.front().layout();
    CMatrix mat = factors.front().matrix();
    bool herm = factors.front().hermitian_hint();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        layout = layout.concat(factors[k].layout());
        CMatrix next = Eigen::kroneckerProduct(mat, factors[k].matrix()).eval();
        mat = std::move(next);
        herm = herm && factors[k].hermitian_hint();
    }
    return {std::move(layout), std::move(mat), herm};
}

template <class T, class... Rest>
    requires(std::same_as<T, StateVector> || std::same_as<T, DenseOperator>)
T tensor(const T& first, const Rest&... rest) {
    const std::vector<T> all{first, rest...};
    return tensor(std::span<const T>(all));
}

// ---------------------------------------------------------------------------
// embed

/// Places a single-subsystem operator on `target_label`, identity elsewhere.
inline DenseOperator embed(const DenseOperator& op, const std::string& target_label, const SpaceLayout& layout) {
    const auto pos = layout.position(target_label);
    if (op.dimension() != layout.subsystems()[pos].dim)
        throw std::invalid_argument("embed: operator dimension does not match subsystem '" + target_label + "'");
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < pos; ++k) left *= layout.subsystems()[k].dim;
    for (std::size_t k = pos + 1; k < layout.size(); ++k) right *= layout.subsystems()[k].dim;
    const auto il = CMatrix::Identity(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(left));
    const auto ir = CMatrix::Identity(static_cast<Eigen::Index>(right), static_cast<Eigen::Index>(right));
    CMatrix inner = Eigen::kroneckerProduct(op.matrix(), ir).eval();
    CMatrix full = Eigen::kroneckerProduct(il, inner).eval();
    return {layout, std::move(full), op.hermitian_hint()};
}

/// Convenience overload taking a raw single-subsystem matrix.
inline DenseOperator embed(const CMatrix& local, const std::string& target_label, const SpaceLayout& layout,
                           bool hermitian_hint = false) {
    const auto& sub = layout.at(target_label);
    return embed(DenseOperator(SpaceLayout{sub}, local, hermitian_hint), target_label, layout);
}

// ---------------------------------------------------------------------------
// inner products and commutators

inline Complex inner(const StateVector& bra, const StateVector& ket) {
    require_same_layout(bra.layout(), ket.layout(), "inner");
    return bra.amplitudes().dot(ket.amplitudes()); // Eigen's dot conjugates the first argument
}

/// |<psi|phi>|^2 for normalized states.
inline double overlap_fidelity(const StateVector& psi, const StateVector& phi) {
    const double f = std::norm(inner(psi, phi));
    return std::clamp(f, 0.0, 1.0);
}

inline DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) {
    require_same_layout(a.layout(), b.layout(), "commutator");
    return {a.layout(), a.matrix() * b.matrix() - b.matrix() * a.matrix(), false};
}

// ---------------------------------------------------------------------------
// local operator matrices

namespace local {

inline CMatrix transition(Level to, Level from) {
    CMatrix m = CMatrix::Zero(3, 3);
    m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    return m;
}

inline CMatrix projector(Level l) { return transition(l, l); }

/// sigma^z = |e><e| - |g><g|; |i> is not touched.
inline CMatrix sigma_z() { return projector(Level::e) - projector(Level::g); }
/// sigma^+ = |e><g|
inline CMatrix sigma_plus() { return transition(Level::e, Level::g); }
/// sigma^- = |g><e|
inline CMatrix sigma_minus() { return transition(Level::g, Level::e); }

inline CMatrix annihilation(std::size_t dim) {
    CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t n = 1; n < dim; ++n)
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    return a;
}

inline CMatrix creation(std::size_t dim) { return annihilation(dim).adjoint(); }

inline CMatrix number(std::size_t dim) {
    CMatrix n = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) n(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = double(k);
    return n;
}

} // namespace local

} // namespace klm
