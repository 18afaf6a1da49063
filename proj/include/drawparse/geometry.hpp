#pragma once

#include <optional>
#include <span>
#include <vector>

#include "drawparse/errors.hpp"

namespace drawparse {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Pixel-space box, y grows downward. Construction rejects non-finite or
// inverted extents.
struct AxisAlignedBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    static AxisAlignedBox make(double x_min, double y_min, double x_max, double y_max);
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    bool operator==(const AxisAlignedBox&) const = default;
};

// Center / extents / rotation box. Canonical form: w >= h, theta in
// [-pi/2, pi/2) measured for the w axis; squares fold theta into
// [-pi/4, pi/4). (w,h,theta) and (h,w,theta±pi/2) therefore construct the
// same value. Degenerate extents or non-finite fields are rejected.
struct OrientedBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double theta = 0.0;

    static OrientedBox make(double cx, double cy, double w, double h, double theta);
    double area() const { return w * h; }

    bool operator==(const OrientedBox&) const = default;
};

// Vertices ordered so the shoelace sum is positive (counterclockwise under
// the y-down drawing convention).
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    static ConvexPolygon make(std::vector<Vec2> vertices);

    bool operator==(const ConvexPolygon&) const = default;
};

template <class BoxT>
struct Scored {
    int class_id = 0;
    BoxT box;
    double confidence = 0.0;

    bool operator==(const Scored&) const = default;
};

using ScoredAabb = Scored<AxisAlignedBox>;
using ScoredObb = Scored<OrientedBox>;

ConvexPolygon obb_to_polygon(const OrientedBox& b);
double polygon_area(const ConvexPolygon& p);

// Sutherland-Hodgman clip of one convex polygon by another. Results with
// area below 1e-12 collapse to nullopt (sliver suppression).
std::optional<ConvexPolygon> polygon_intersection(const ConvexPolygon& a, const ConvexPolygon& b);

double iou(const AxisAlignedBox& a, const AxisAlignedBox& b);
double iou(const OrientedBox& a, const OrientedBox& b);

// Greedy class-wise suppression. Candidates ordered by confidence
// descending, ties by (class_id, input index) ascending; a candidate is kept
// iff its IoU with every kept box of the same class is <= threshold.
template <class BoxT>
std::vector<Scored<BoxT>> nms(const std::vector<Scored<BoxT>>& dets, double iou_threshold);

extern template std::vector<ScoredAabb> nms(const std::vector<ScoredAabb>&, double);
extern template std::vector<ScoredObb> nms(const std::vector<ScoredObb>&, double);

// Translate a view-local detection into drawing coordinates.
OrientedBox remap_to_global(const OrientedBox& local, Vec2 view_origin);

AxisAlignedBox enclosing_aabb(const OrientedBox& b);

// Minimum-area enclosing rectangle of >= 3 points (rotating calipers over
// the convex hull). Exact when the points are the corners of a rectangle.
OrientedBox min_area_obb(std::span<const Vec2> points);

// Row-major |rows| x |cols| pairwise IoU. The unqualified form runs the
// OpenMP kernel; *_serial is the reference kept for testing and benchmarks.
// Both produce bit-identical matrices.
std::vector<double> iou_matrix(std::span<const AxisAlignedBox> rows,
                               std::span<const AxisAlignedBox> cols);
std::vector<double> iou_matrix(std::span<const OrientedBox> rows,
                               std::span<const OrientedBox> cols);
std::vector<double> iou_matrix_serial(std::span<const AxisAlignedBox> rows,
                                      std::span<const AxisAlignedBox> cols);
std::vector<double> iou_matrix_serial(std::span<const OrientedBox> rows,
                                      std::span<const OrientedBox> cols);

}  // namespace drawparse
