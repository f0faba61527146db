#include "robustplay/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace robustplay {

bool Point::is_finite() const {
    return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
}

Point& Point::operator+=(const Point& other) {
    require_same_dim(*this, other, "point addition");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
    return *this;
}

Point& Point::operator-=(const Point& other) {
    require_same_dim(*this, other, "point subtraction");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
    return *this;
}

Point& Point::operator*=(double scale) {
    for (auto& v : coords_) v *= scale;
    return *this;
}

Point operator+(Point lhs, const Point& rhs) { return lhs += rhs; }
Point operator-(Point lhs, const Point& rhs) { return lhs -= rhs; }
Point operator*(double scale, Point p) { return p *= scale; }
Point operator-(Point p) { return p *= -1.0; }

double dot(const Point& a, const Point& b) {
    require_same_dim(a, b, "dot product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm1(const Point& p) {
    double s = 0.0;
    for (double v : p) s += std::abs(v);
    return s;
}

double norm2(const Point& p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

double norm_inf(const Point& p) {
    double s = 0.0;
    for (double v : p) s = std::max(s, std::abs(v));
    return s;
}

double distance2(const Point& a, const Point& b) { return norm2(a - b); }

Point unit_vector(std::size_t n, std::size_t i) {
    Point e(n);
    e[i] = 1.0;
    return e;
}

Point concat(std::span<const Point> blocks) {
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    return Point(std::move(out));
}

std::vector<Point> split(const Point& p, std::span<const std::size_t> sizes) {
    std::vector<Point> out;
    std::size_t offset = 0;
    for (auto n : sizes) {
        if (offset + n > p.size()) throw std::invalid_argument("split: block sizes exceed dimension");
        out.emplace_back(std::vector<double>(p.begin() + offset, p.begin() + offset + n));
        offset += n;
    }
    if (offset != p.size()) throw std::invalid_argument("split: block sizes do not cover dimension");
    return out;
}

std::ostream& operator<<(std::ostream& os, const Point& p) {
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << format_real(p[i]);
    return os << ')';
}

void require_same_dim(const Point& a, const Point& b, const char* what) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

void CompensatedSum::add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
        compensation_ += (sum_ - t) + value;
    else
        compensation_ += (value - t) + sum_;
    sum_ = t;
}

void CompensatedVector::add(const Point& p, double scale) {
    if (sums_.empty() && p.size() > 0) sums_.resize(p.size());
    if (p.size() != sums_.size()) throw std::invalid_argument("CompensatedVector: dimension mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) sums_[i].add(scale * p[i]);
}

Point CompensatedVector::value() const {
    Point out(sums_.size());
    for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = sums_[i].value();
    return out;
}

Point average_point(std::span<const Point> points) {
    if (points.empty()) throw std::invalid_argument("no rounds");
    CompensatedVector acc(points.front().size());
    for (const auto& p : points) acc.add(p);
    Point mean = acc.value();
    mean *= 1.0 / static_cast<double>(points.size());
    return mean;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomSource RandomSource::derive(std::uint64_t stream_id) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL)));
}

RandomSource::Engine RandomSource::round_stream(std::uint64_t t) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    return Engine(seq);
}

double uniform01(RandomSource::Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

const char* to_string(ScheduleOrder order) {
    switch (order) {
    case ScheduleOrder::parallel: return "parallel";
    case ScheduleOrder::dual_first: return "dual_first";
    case ScheduleOrder::primal_first: return "primal_first";
    }
    return "?";
}

std::string format_real(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_transcript_csv(std::ostream& os, const Transcript& tr) {
    if (tr.rounds.empty()) {
        os << "t,loss\n";
        return;
    }
    const auto& first = tr.rounds.front();
    const std::size_t dx = first.x.size();
    const std::size_t du = first.u.size();
    const std::size_t dl = first.lambda ? first.lambda->size() : 0;
    const std::size_t T = tr.rounds.size();
    const bool has_rx = tr.cum_regret_x.size() == T;
    const bool has_ru = tr.cum_regret_u.size() == T;
    const bool has_gb = tr.gap_bound.size() == T;

    os << 't';
    for (std::size_t i = 0; i < dx; ++i) os << ",x_" << i;
    for (std::size_t i = 0; i < du; ++i) os << ",u_" << i;
    for (std::size_t i = 0; i < dl; ++i) os << ",lambda_" << i;
    os << ",loss";
    if (has_rx) os << ",cum_regret_x";
    if (has_ru) os << ",cum_regret_u";
    if (has_gb) os << ",gap_bound";
    os << '\n';

    for (std::size_t k = 0; k < T; ++k) {
        const auto& r = tr.rounds[k];
        os << r.t;
        for (double v : r.x) os << ',' << format_real(v);
        for (double v : r.u) os << ',' << format_real(v);
        if (dl) {
            for (double v : *r.lambda) os << ',' << format_real(v);
        }
        os << ',' << format_real(r.loss);
        if (has_rx) os << ',' << format_real(tr.cum_regret_x[k]);
        if (has_ru) os << ',' << format_real(tr.cum_regret_u[k]);
        if (has_gb) os << ',' << format_real(tr.gap_bound[k]);
        os << '\n';
    }
}

Point Solution::mean_point() const {
    if (kind == SolutionKind::averaged_point && xbar) return *xbar;
    return average_point(support);
}

}  // namespace robustplay
