#include "cvp/space.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "cvp/error.hpp"

namespace cvp {
namespace {

constexpr double kOrthonormalTol = 1e-10;

Error dim_error(const std::string& what) { return Error(ErrorKind::dimension_mismatch, what); }

// Lexicographic compare of two real sequences padded with zeros.
int compare_padded(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.size() ? a[i] : 0.0;
        const double y = i < b.size() ? b[i] : 0.0;
        if (x < y) return -1;
        if (y < x) return 1;
    }
    return 0;
}

int compare_ops(const OperatorPoint& a, const OperatorPoint& b) {
    if (a.rank() != b.rank()) return a.rank() < b.rank() ? -1 : 1;
    for (int i = 0; i < a.rank(); ++i) {
        if (a.eigenvalues()[i] < b.eigenvalues()[i]) return -1;
        if (b.eigenvalues()[i] < a.eigenvalues()[i]) return 1;
    }
    for (int j = 0; j < a.frame().cols(); ++j) {
        for (int i = 0; i < a.frame().rows(); ++i) {
            const auto x = a.frame()(i, j), y = b.frame()(i, j);
            if (x.real() != y.real()) return x.real() < y.real() ? -1 : 1;
            if (x.imag() != y.imag()) return x.imag() < y.imag() ? -1 : 1;
        }
    }
    return 0;
}

void require_compatible(const Point& x, const Point& y) {
    if (x.realization() != y.realization()) throw dim_error("points use different realizations");
    if (x.dims_per_level() != y.dims_per_level())
        throw dim_error("points use different dims_per_level");
    if (x.realization() == Realization::operator_) {
        const auto& a = x.op();
        const auto& b = y.op();
        if (a.hilbert_trunc() != b.hilbert_trunc() || a.spin_dimension() != b.spin_dimension())
            throw dim_error("operator points differ in spin dimension or Hilbert truncation");
    }
}

double operator_distance(const OperatorPoint& a, const OperatorPoint& b) {
    const int ra = a.rank(), rb = b.rank();
    if (ra + rb == 0) return 0.0;
    const int n = a.hilbert_trunc();
    Eigen::MatrixXcd joint(n, ra + rb);
    joint << a.frame(), b.frame();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(joint);
    qr.setThreshold(1e-13);
    const auto k = qr.rank();
    if (k == 0) return 0.0;
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
    const Eigen::MatrixXcd pa = q.adjoint() * a.frame();
    const Eigen::MatrixXcd pb = q.adjoint() * b.frame();
    Eigen::MatrixXcd diff = pa * a.eigenvalues().asDiagonal() * pa.adjoint() -
                            pb * b.eigenvalues().asDiagonal() * pb.adjoint();
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "operator distance");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

// --- OperatorPoint ---------------------------------------------------------

OperatorPoint OperatorPoint::zero(int spin_dimension, int hilbert_trunc) {
    if (spin_dimension < 1 || hilbert_trunc < 1)
        throw Error(ErrorKind::invalid_argument, "spin dimension and Hilbert truncation must be positive");
    OperatorPoint z;
    z.eigenvalues_.resize(0);
    z.frame_.resize(hilbert_trunc, 0);
    z.spin_ = spin_dimension;
    return z;
}

OperatorPoint::OperatorPoint(Eigen::VectorXd eigenvalues, Eigen::MatrixXcd frame, int spin_dimension)
    : spin_(spin_dimension) {
    if (spin_dimension < 1) throw Error(ErrorKind::invalid_argument, "spin dimension must be positive");
    if (frame.cols() != eigenvalues.size())
        throw dim_error("frame needs one column per eigenvalue");
    if (frame.rows() < 1) throw dim_error("Hilbert truncation must be positive");

    std::vector<int> keep;
    int pos = 0, neg = 0;
    for (int i = 0; i < eigenvalues.size(); ++i) {
        const double v = eigenvalues[i];
        if (!std::isfinite(v)) throw Error(ErrorKind::numerical_failure, "non-finite eigenvalue");
        if (v > 0) ++pos;
        if (v < 0) ++neg;
        if (v != 0.0) keep.push_back(i);
    }
    if (pos > spin_dimension || neg > spin_dimension)
        throw Error(ErrorKind::shape_error, "more than s positive or s negative eigenvalues");

    eigenvalues_.resize(static_cast<Eigen::Index>(keep.size()));
    frame_.resize(frame.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        eigenvalues_[static_cast<Eigen::Index>(j)] = eigenvalues[keep[j]];
        frame_.col(static_cast<Eigen::Index>(j)) = frame.col(keep[j]);
    }
    const Eigen::MatrixXcd gram = frame_.adjoint() * frame_;
    const auto eye = Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
    if (gram.rows() > 0 && (gram - eye).cwiseAbs().maxCoeff() > kOrthonormalTol)
        throw Error(ErrorKind::shape_error, "frame columns are not orthonormal");
}

Eigen::MatrixXcd OperatorPoint::materialize() const {
    return frame_ * eigenvalues_.asDiagonal() * frame_.adjoint();
}

int OperatorPoint::last_nonzero_row() const noexcept {
    for (Eigen::Index i = frame_.rows() - 1; i >= 0; --i) {
        for (Eigen::Index j = 0; j < frame_.cols(); ++j)
            if (frame_(i, j) != std::complex<double>(0.0, 0.0)) return static_cast<int>(i);
    }
    return -1;
}

// --- Point ------------------------------------------------------------------

Point::Point(int level, std::vector<double> coords, int dims_per_level)
    : level_(level), dims_per_level_(dims_per_level), realization_(Realization::euclidean),
      coords_(std::move(coords)) {
    if (level < 1 || dims_per_level < 1)
        throw Error(ErrorKind::invalid_argument, "level and dims_per_level must be positive");
    if (coords_.size() != static_cast<std::size_t>(level) * static_cast<std::size_t>(dims_per_level))
        throw dim_error("coords must have level * dims_per_level entries");
    for (double c : coords_)
        if (!std::isfinite(c)) throw Error(ErrorKind::invalid_argument, "non-finite coordinate");
}

Point Point::euclidean(int level, std::vector<double> coords) {
    if (level < 1 || coords.empty() || coords.size() % static_cast<std::size_t>(level) != 0)
        throw dim_error("coords length must be a positive multiple of the level");
    const int dpl = static_cast<int>(coords.size()) / level;
    return Point(level, std::move(coords), dpl);
}

Point::Point(int level, OperatorPoint op, int dims_per_level)
    : level_(level), dims_per_level_(dims_per_level), realization_(Realization::operator_),
      op_(std::move(op)) {
    if (level < 1 || dims_per_level < 1)
        throw Error(ErrorKind::invalid_argument, "level and dims_per_level must be positive");
    if (op_->last_nonzero_row() >= level * dims_per_level)
        throw dim_error("operator frame has nonzero rows beyond its level");
}

const std::vector<double>& Point::coords() const {
    if (realization_ != Realization::euclidean) throw dim_error("coords() on an operator point");
    return coords_;
}

const OperatorPoint& Point::op() const {
    if (realization_ != Realization::operator_) throw dim_error("op() on a Euclidean point");
    return *op_;
}

int Point::intrinsic_level() const noexcept {
    int last = -1;
    if (realization_ == Realization::euclidean) {
        for (std::size_t i = coords_.size(); i-- > 0;) {
            if (coords_[i] != 0.0) {
                last = static_cast<int>(i);
                break;
            }
        }
    } else {
        last = op_->last_nonzero_row();
    }
    return last < 0 ? 1 : last / dims_per_level_ + 1;
}

// --- metric -----------------------------------------------------------------

double distance(const Point& x, const Point& y) {
    require_compatible(x, y);
    if (x.realization() == Realization::operator_)
        return canonical_less(y, x) ? operator_distance(y.op(), x.op()) : operator_distance(x.op(), y.op());
    const auto& a = x.coords();
    const auto& b = y.coords();
    const std::size_t n = std::max(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
        s += d * d;
    }
    return std::sqrt(s);
}

Point lift(const Point& x, int target_level) {
    if (target_level < x.level())
        throw Error(ErrorKind::level_downcast,
                    "cannot lift level " + std::to_string(x.level()) + " to " + std::to_string(target_level));
    if (target_level == x.level()) return x;
    if (x.realization() == Realization::operator_) return Point(target_level, x.op(), x.dims_per_level());
    std::vector<double> c = x.coords();
    c.resize(static_cast<std::size_t>(target_level) * static_cast<std::size_t>(x.dims_per_level()), 0.0);
    return Point(target_level, std::move(c), x.dims_per_level());
}

bool canonical_less(const Point& a, const Point& b) {
    if (a.realization() != b.realization()) return a.realization() < b.realization();
    const int c = a.realization() == Realization::euclidean ? compare_padded(a.coords(), b.coords())
                                                            : compare_ops(a.op(), b.op());
    if (c != 0) return c < 0;
    return a.level() < b.level();
}

bool same_representation(const Point& a, const Point& b) {
    if (a.realization() != b.realization() || a.dims_per_level() != b.dims_per_level()) return false;
    if (a.realization() == Realization::euclidean) return compare_padded(a.coords(), b.coords()) == 0;
    const auto& x = a.op();
    const auto& y = b.op();
    return x.hilbert_trunc() == y.hilbert_trunc() && compare_ops(x, y) == 0;
}

// --- sets -------------------------------------------------------------------

bool contains(const Ball& ball, const Point& p) {
    return p.intrinsic_level() <= ball.level && distance(p, ball.center) <= ball.radius;
}

bool contains(const TestSet& set, const Point& p) {
    return std::any_of(set.balls.begin(), set.balls.end(), [&](const Ball& b) { return contains(b, p); });
}

bool contains(const OpenRegion& region, const Point& p) {
    return std::any_of(region.balls.begin(), region.balls.end(),
                       [&](const OpenBall& b) { return distance(p, b.center) < b.radius; });
}

bool subset_of(const TestSet& d, const OpenRegion& u) {
    if (d.balls.empty()) return true;
    return std::all_of(d.balls.begin(), d.balls.end(), [&](const Ball& b) {
        return std::any_of(u.balls.begin(), u.balls.end(), [&](const OpenBall& o) {
            return distance(b.center, o.center) + b.radius < o.radius;
        });
    });
}

bool ball_inside(const Ball& a, const Ball& b) {
    return a.level <= b.level && distance(a.center, b.center) + a.radius <= b.radius;
}

bool provably_disjoint(const TestSet& a, const TestSet& b) {
    for (const auto& x : a.balls)
        for (const auto& y : b.balls)
            if (!(distance(x.center, y.center) > x.radius + y.radius)) return false;
    return true;
}

bool provably_subset(const TestSet& a, const TestSet& b) {
    return std::all_of(a.balls.begin(), a.balls.end(), [&](const Ball& x) {
        return std::any_of(b.balls.begin(), b.balls.end(), [&](const Ball& y) { return ball_inside(x, y); });
    });
}

bool region_covered(const OpenRegion& u, const OpenRegion& u2) {
    return std::all_of(u.balls.begin(), u.balls.end(), [&](const OpenBall& x) {
        return std::any_of(u2.balls.begin(), u2.balls.end(), [&](const OpenBall& y) {
            return distance(x.center, y.center) + x.radius <= y.radius;
        });
    });
}

// --- test family --------------------------------------------------------------

std::optional<std::size_t> TestSetFamily::find_union(std::size_t a, std::size_t b) const {
    std::vector<int> key;
    std::set_union(member_keys[a].begin(), member_keys[a].end(), member_keys[b].begin(),
                   member_keys[b].end(), std::back_inserter(key));
    auto it = key_index.find(key);
    if (it == key_index.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> TestSetFamily::members_within_level(int n) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& balls = members[i].balls;
        if (std::all_of(balls.begin(), balls.end(), [n](const Ball& b) { return b.level <= n; }))
            out.push_back(i);
    }
    return out;
}

TestSetFamily build_test_family(std::span<const Point> dense_sample, std::span<const double> radii,
                                int union_depth, std::size_t max_members) {
    if (dense_sample.empty()) throw Error(ErrorKind::invalid_family, "empty dense sample");
    if (radii.empty()) throw Error(ErrorKind::invalid_family, "empty radius list");
    if (union_depth < 0) throw Error(ErrorKind::invalid_family, "negative union depth");
    for (double r : radii)
        if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::invalid_family, "radii must be positive");

    TestSetFamily fam;
    fam.dense_sample.assign(dense_sample.begin(), dense_sample.end());
    fam.radii.assign(radii.begin(), radii.end());
    fam.union_depth = union_depth;

    // Base balls, with equal balls collapsed onto one index.
    std::vector<int> canonical;
    for (const auto& p : dense_sample) {
        for (double r : radii) {
            Ball b{p, r, p.intrinsic_level()};
            int found = -1;
            for (std::size_t k = 0; k < fam.base_balls.size(); ++k) {
                const auto& e = fam.base_balls[k];
                if (e.radius == b.radius && e.level == b.level && same_representation(e.center, b.center)) {
                    found = static_cast<int>(k);
                    break;
                }
            }
            if (found < 0) {
                found = static_cast<int>(fam.base_balls.size());
                fam.base_balls.push_back(std::move(b));
            }
            canonical.push_back(found);
        }
    }

    auto add_member = [&](std::vector<int> key, int depth) {
        if (fam.key_index.contains(key)) return;
        if (fam.members.size() >= max_members)
            throw Error(ErrorKind::family_too_large,
                        "test family exceeds " + std::to_string(max_members) + " members");
        TestSet set;
        set.id = static_cast<int>(fam.members.size());
        for (int k : key) set.balls.push_back(fam.base_balls[static_cast<std::size_t>(k)]);
        fam.key_index.emplace(key, fam.members.size());
        fam.members.push_back(std::move(set));
        fam.member_keys.push_back(std::move(key));
        fam.member_depth.push_back(depth);
    };

    for (int k : canonical) add_member({k}, 0);

    for (int depth = 1; depth <= union_depth; ++depth) {
        const std::size_t prev = fam.members.size();
        for (std::size_t a = 0; a < prev; ++a) {
            for (std::size_t b = a + 1; b < prev; ++b) {
                std::vector<int> key;
                std::set_union(fam.member_keys[a].begin(), fam.member_keys[a].end(),
                               fam.member_keys[b].begin(), fam.member_keys[b].end(),
                               std::back_inserter(key));
                add_member(std::move(key), depth);
            }
        }
        if (fam.members.size() == prev) break;  // closed under unions already
    }
    return fam;
}

}  // namespace cvp
