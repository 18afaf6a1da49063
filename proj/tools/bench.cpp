// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: pairwise oriented IoU matrices and per-image detection
// matching. Also verifies that both paths produce identical results.

#include <omp.h>

#include <cstdio>
#include <vector>

#include "drawparse/eval.hpp"
#include "drawparse/geometry.hpp"
#include "drawparse/ingest.hpp"

using namespace drawparse;

namespace {

std::vector<OrientedBox> random_boxes(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<OrientedBox> boxes;
    boxes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = rng.next_double() * 100.0;
        const double cy = rng.next_double() * 100.0;
        const double w = 0.5 + rng.next_double() * 5.0;
        const double h = 0.5 + rng.next_double() * 5.0;
        const double theta = (rng.next_double() - 0.5) * 3.141592653589793;
        boxes.push_back(OrientedBox::make(cx, cy, w, h, theta));
    }
    return boxes;
}

std::vector<LabeledImage<OrientedBox>> random_images(std::size_t count, std::size_t per_image,
                                                     std::uint64_t seed) {
    std::vector<LabeledImage<OrientedBox>> images(count);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        images[i].id = "img" + std::to_string(i);
        const auto gts = random_boxes(per_image, rng.next());
        const auto preds = random_boxes(per_image, rng.next());
        for (const auto& b : gts) images[i].gts.emplace_back(int(rng.next() % 3), b);
        for (const auto& b : preds)
            images[i].preds.push_back({int(rng.next() % 3), b, rng.next_double()});
    }
    return images;
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", omp_get_max_threads());

    {
        const auto rows = random_boxes(1200, 1);
        const auto cols = random_boxes(1200, 2);
        const double t0 = omp_get_wtime();
        const auto serial = iou_matrix_serial(rows, cols);
        const double t1 = omp_get_wtime();
        const auto parallel = iou_matrix(rows, cols);
        const double t2 = omp_get_wtime();
        const bool identical = serial == parallel;
        std::printf("oriented IoU matrix (1200 x 1200)\n");
        std::printf("  serial:   %8.3f s\n", t1 - t0);
        std::printf("  parallel: %8.3f s  (speedup %.2fx, results %s)\n\n", t2 - t1,
                    (t1 - t0) / (t2 - t1), identical ? "identical" : "DIFFER");
        if (!identical) return 1;
    }

    {
        const auto images = random_images(400, 40, 7);
        MatchConfig cfg;
        cfg.iou_threshold = 0.3;
        cfg.iou_kind = MatchConfig::IouKind::Oriented;
        const double t0 = omp_get_wtime();
        const auto serial = evaluate_images_serial<OrientedBox>(images, 3, cfg);
        const double t1 = omp_get_wtime();
        const auto parallel = evaluate_images<OrientedBox>(images, 3, cfg);
        const double t2 = omp_get_wtime();
        const bool identical =
            serial.per_class == parallel.per_class && serial.confusion == parallel.confusion;
        std::printf("detection matching (400 images, 40+40 boxes each)\n");
        std::printf("  serial:   %8.3f s\n", t1 - t0);
        std::printf("  parallel: %8.3f s  (speedup %.2fx, results %s)\n", t2 - t1,
                    (t1 - t0) / (t2 - t1), identical ? "identical" : "DIFFER");
        if (!identical) return 1;
    }
    return 0;
}
