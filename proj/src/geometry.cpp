#include "drawparse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace drawparse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSliverArea = 1e-12;

bool all_finite(std::initializer_list<double> vs) {
    for (double v : vs)
        if (!std::isfinite(v)) return false;
    return true;
}

double fold_half_turn(double t) {
    // remainder lands in [-pi/2, pi/2]; close the interval on the right.
    t = std::remainder(t, kPi);
    if (t >= kPi / 2) t -= kPi;
    return t;
}

}  // namespace

AxisAlignedBox AxisAlignedBox::make(double x_min, double y_min, double x_max, double y_max) {
    if (!all_finite({x_min, y_min, x_max, y_max}))
        throw ValidationError("axis-aligned box has non-finite coordinates");
    if (x_min > x_max || y_min > y_max)
        throw ValidationError("axis-aligned box has inverted extents");
    return AxisAlignedBox{x_min, y_min, x_max, y_max};
}

OrientedBox OrientedBox::make(double cx, double cy, double w, double h, double theta) {
    if (!all_finite({cx, cy, w, h, theta}))
        throw ValidationError("oriented box has non-finite fields");
    if (w <= 0.0 || h <= 0.0)
        throw ValidationError("oriented box extents must be positive");
    double t = fold_half_turn(theta);
    if (w < h) {
        std::swap(w, h);
        t = t + kPi / 2;
        if (t >= kPi / 2) t -= kPi;
    }
    if (w == h) {
        t = std::remainder(t, kPi / 2);
        if (t >= kPi / 4) t -= kPi / 2;
    }
    if (t == 0.0) t = 0.0;  // normalize -0
    return OrientedBox{cx, cy, w, h, t};
}

ConvexPolygon ConvexPolygon::make(std::vector<Vec2> vertices) {
    if (vertices.size() < 3) throw ValidationError("polygon needs at least 3 vertices");
    const std::size_t n = vertices.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % n];
        const Vec2 c = vertices[(i + 2) % n];
        if (cross(b - a, c - b) < 0.0) throw ValidationError("polygon is not convex");
        area2 += cross(a, b);
    }
    if (area2 <= 0.0) throw ValidationError("polygon orientation must give positive area");
    return ConvexPolygon{std::move(vertices)};
}

ConvexPolygon obb_to_polygon(const OrientedBox& b) {
    const double c = std::cos(b.theta);
    const double s = std::sin(b.theta);
    const double hw = b.w / 2;
    const double hh = b.h / 2;
    // Local corner order keeps the shoelace sum positive after rotation.
    const Vec2 local[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    ConvexPolygon p;
    p.vertices.reserve(4);
    for (const Vec2 q : local)
        p.vertices.push_back({b.cx + q.x * c - q.y * s, b.cy + q.x * s + q.y * c});
    return p;
}

double polygon_area(const ConvexPolygon& p) {
    const std::size_t n = p.vertices.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        area2 += cross(p.vertices[i], p.vertices[(i + 1) % n]);
    return area2 / 2;
}

std::optional<ConvexPolygon> polygon_intersection(const ConvexPolygon& a, const ConvexPolygon& b) {
    std::vector<Vec2> out = a.vertices;
    std::vector<Vec2> in;
    const std::size_t nb = b.vertices.size();
    for (std::size_t e = 0; e < nb && !out.empty(); ++e) {
        const Vec2 p1 = b.vertices[e];
        const Vec2 p2 = b.vertices[(e + 1) % nb];
        const Vec2 dir = p2 - p1;
        in.swap(out);
        out.clear();
        const std::size_t n = in.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 cur = in[i];
            const Vec2 nxt = in[(i + 1) % n];
            const double dc = cross(dir, cur - p1);
            const double dn = cross(dir, nxt - p1);
            if (dc >= 0.0) out.push_back(cur);
            if ((dc >= 0.0) != (dn >= 0.0)) {
                const double t = dc / (dc - dn);
                out.push_back(cur + (nxt - cur) * t);
            }
        }
    }
    if (out.size() < 3) return std::nullopt;
    ConvexPolygon result{std::move(out)};
    if (polygon_area(result) < kSliverArea) return std::nullopt;
    return result;
}

double iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const OrientedBox& a, const OrientedBox& b) {
    // Order operands so iou(a,b) and iou(b,a) run the identical clip.
    const auto key = [](const OrientedBox& o) {
        return std::tie(o.cx, o.cy, o.w, o.h, o.theta);
    };
    const OrientedBox& lo = key(b) < key(a) ? b : a;
    const OrientedBox& hi = key(b) < key(a) ? a : b;
    const auto inter = polygon_intersection(obb_to_polygon(lo), obb_to_polygon(hi));
    if (!inter) return 0.0;
    const double ia = polygon_area(*inter);
    const double uni = lo.area() + hi.area() - ia;
    if (uni <= 0.0) return 0.0;
    return std::clamp(ia / uni, 0.0, 1.0);
}

template <class BoxT>
std::vector<Scored<BoxT>> nms(const std::vector<Scored<BoxT>>& dets, double iou_threshold) {
    for (const auto& d : dets)
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
            throw ValidationError("detection confidence outside [0,1]");
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (dets[i].confidence != dets[j].confidence)
            return dets[i].confidence > dets[j].confidence;
        if (dets[i].class_id != dets[j].class_id) return dets[i].class_id < dets[j].class_id;
        return i < j;
    });
    std::vector<Scored<BoxT>> kept;
    for (std::size_t idx : order) {
        const auto& cand = dets[idx];
        bool suppressed = false;
        for (const auto& k : kept) {
            if (k.class_id != cand.class_id) continue;
            if (iou(k.box, cand.box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

template std::vector<ScoredAabb> nms(const std::vector<ScoredAabb>&, double);
template std::vector<ScoredObb> nms(const std::vector<ScoredObb>&, double);

OrientedBox remap_to_global(const OrientedBox& local, Vec2 view_origin) {
    return OrientedBox::make(local.cx + view_origin.x, local.cy + view_origin.y, local.w, local.h,
                             local.theta);
}

AxisAlignedBox enclosing_aabb(const OrientedBox& b) {
    const ConvexPolygon p = obb_to_polygon(b);
    double x_min = p.vertices[0].x, x_max = p.vertices[0].x;
    double y_min = p.vertices[0].y, y_max = p.vertices[0].y;
    for (const Vec2 v : p.vertices) {
        x_min = std::min(x_min, v.x);
        x_max = std::max(x_max, v.x);
        y_min = std::min(y_min, v.y);
        y_max = std::max(y_max, v.y);
    }
    return AxisAlignedBox{x_min, y_min, x_max, y_max};
}

namespace {

std::vector<Vec2> convex_hull(std::span<const Vec2> points) {
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) throw ValidationError("degenerate point set: hull has fewer than 3 points");
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw ValidationError("degenerate point set: hull has fewer than 3 points");
    return hull;
}

}  // namespace

OrientedBox min_area_obb(std::span<const Vec2> points) {
    const std::vector<Vec2> hull = convex_hull(points);
    const std::size_t n = hull.size();
    double best_area = std::numeric_limits<double>::infinity();
    OrientedBox best{};
    for (std::size_t e = 0; e < n; ++e) {
        const Vec2 edge = hull[(e + 1) % n] - hull[e];
        const double len = std::hypot(edge.x, edge.y);
        if (len == 0.0) continue;
        const Vec2 u{edge.x / len, edge.y / len};
        const Vec2 v{-u.y, u.x};
        double u_min = dot(hull[0], u), u_max = u_min;
        double v_min = dot(hull[0], v), v_max = v_min;
        for (std::size_t i = 1; i < n; ++i) {
            const double pu = dot(hull[i], u);
            const double pv = dot(hull[i], v);
            u_min = std::min(u_min, pu);
            u_max = std::max(u_max, pu);
            v_min = std::min(v_min, pv);
            v_max = std::max(v_max, pv);
        }
        const double w = u_max - u_min;
        const double h = v_max - v_min;
        const double area = w * h;
        if (area < best_area) {
            best_area = area;
            const double mu = (u_min + u_max) / 2;
            const double mv = (v_min + v_max) / 2;
            best = OrientedBox::make(u.x * mu + v.x * mv, u.y * mu + v.y * mv, w, h,
                                     std::atan2(u.y, u.x));
        }
    }
    if (!std::isfinite(best_area)) throw ValidationError("degenerate point set: zero-length hull edges");
    return best;
}

namespace {

template <class BoxT>
std::vector<double> matrix_impl(std::span<const BoxT> rows, std::span<const BoxT> cols,
                                bool parallel) {
    std::vector<double> m(rows.size() * cols.size());
    const std::int64_t nr = static_cast<std::int64_t>(rows.size());
    const std::int64_t nc = static_cast<std::int64_t>(cols.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < nr; ++i)
        for (std::int64_t j = 0; j < nc; ++j) m[i * nc + j] = iou(rows[i], cols[j]);
    return m;
}

}  // namespace

std::vector<double> iou_matrix(std::span<const AxisAlignedBox> rows,
                               std::span<const AxisAlignedBox> cols) {
    return matrix_impl(rows, cols, true);
}

std::vector<double> iou_matrix(std::span<const OrientedBox> rows,
                               std::span<const OrientedBox> cols) {
    return matrix_impl(rows, cols, true);
}

std::vector<double> iou_matrix_serial(std::span<const AxisAlignedBox> rows,
                                      std::span<const AxisAlignedBox> cols) {
    return matrix_impl(rows, cols, false);
}

std::vector<double> iou_matrix_serial(std::span<const OrientedBox> rows,
                                      std::span<const OrientedBox> cols) {
    return matrix_impl(rows, cols, false);
}

}  // namespace drawparse
