#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "supr/tomo.hpp"

using namespace supr;

TEST_CASE("rasterize_phantom fills a covering disk with its value") {
    const auto phantom = uniform_disk_phantom(0.210, 100.0, 10.0);  // disk dwarfs the grid
    const auto image = rasterize_phantom(phantom, 8, 3);
    for (double v : image.values) CHECK(v == Catch::Approx(0.210));
    CHECK(image.pixel_size == Catch::Approx(10.0 / 8.0));
}

TEST_CASE("rasterize_phantom of an empty phantom is zero") {
    const Phantom empty{{}, 5.0};
    const auto image = rasterize_phantom(empty, 4, 11);
    for (double v : image.values) CHECK(v == 0.0);
}

TEST_CASE("subsampling averages boundary pixels toward the covered fraction") {
    // Rectangle covering x <= 0; the middle pixel column of a 5-wide grid
    // straddles the boundary through its center.
    Phantom half;
    half.extent = 5.0;
    half.shapes = {Rectangle{-2.5, 0.0, 2.5, 10.0, 1.0}};

    const auto coarse = rasterize_phantom(half, 5, 1);
    CHECK(coarse.at(2, 0) == 1.0);
    CHECK(coarse.at(2, 2) == 1.0);  // single center sample falls inside
    CHECK(coarse.at(2, 4) == 0.0);

    const auto fine = rasterize_phantom(half, 5, 11);
    CHECK(fine.at(2, 0) == 1.0);
    CHECK(fine.at(2, 4) == 0.0);
    CHECK(fine.at(2, 2) == Catch::Approx(0.5).margin(0.06));
}

TEST_CASE("system_row of an axis-aligned ray crosses one pixel row") {
    // Two views 90 degrees apart; view 1 rays run horizontally. Ray 2 of 4
    // sits at y = +0.5, the middle of the row above the center line.
    const ScanGeometry geometry{2, 90.0, 4, 1.0, 1};
    const ImageGrid grid{4, 1.0};
    const auto entries = system_row(geometry, grid, 1 * 4 + 2);
    REQUIRE(entries.size() == 4);
    for (const auto& e : entries) {
        CHECK(e.value == Catch::Approx(1.0));
        CHECK(e.index / 4 == 1);  // row index 1 covers y in [0, 1]
    }
}

TEST_CASE("system_row of a diagonal ray picks up full pixel diagonals") {
    // 45-degree view through the center of a 2x2 grid: the line runs along
    // y = -x, crossing two pixels corner to corner.
    const ScanGeometry geometry{2, 45.0, 1, 1.0, 1};
    const ImageGrid grid{2, 1.0};
    const auto entries = system_row(geometry, grid, 1);
    REQUIRE(entries.size() == 2);
    for (const auto& e : entries) CHECK(e.value == Catch::Approx(std::sqrt(2.0)));
    CHECK(entries[0].index == 0);  // top-left
    CHECK(entries[1].index == 3);  // bottom-right
}

TEST_CASE("system_row entries sum to the chord across the image square") {
    const ScanGeometry geometry{7, 26.0, 9, 0.8, 1};
    const ImageGrid grid{11, 0.5};
    const Rectangle square{0.0, 0.0, 0.5 * grid.extent(), 0.5 * grid.extent(), 1.0};
    for (std::size_t i = 0; i < geometry.total_rays(); ++i) {
        const auto entries = system_row(geometry, grid, i);
        double sum = 0.0;
        for (const auto& e : entries) {
            CHECK(e.value >= 0.0);
            CHECK(e.value <= grid.pixel_size * std::sqrt(2.0) + 1e-12);
            sum += e.value;
        }
        const std::size_t view = i / geometry.rays_per_view;
        const double chord = chord_length(Shape{square}, geometry.line_for(view, i % 9));
        CHECK(sum == Catch::Approx(chord).margin(1e-9));
    }
}

TEST_CASE("rays that miss the grid produce empty rows") {
    const ScanGeometry geometry{1, 0.0, 2, 1000.0, 1};  // both rays far off-center
    const ImageGrid grid{4, 1.0};
    CHECK(system_row(geometry, grid, 0).empty());
    CHECK(system_row(geometry, grid, 1).empty());
}

TEST_CASE("noiseless projections of an empty phantom vanish") {
    const Phantom empty{{}, 10.0};
    const ScanGeometry geometry{3, 60.0, 5, 1.0, 11};
    const auto data = simulate_projections(empty, geometry, NoiseModel{});
    REQUIRE(data.rays.size() == geometry.total_rays());
    for (const auto& m : data.rays) CHECK(m.b == 0.0);
}

TEST_CASE("noiseless projection through a disk center equals value times chord") {
    const double radius = 3.0, value = 0.21;
    const auto phantom = uniform_disk_phantom(value, radius, 10.0);
    const ScanGeometry geometry{1, 0.0, 5, 1.0, 11};  // middle ray passes the center
    const auto data = simulate_projections(phantom, geometry, NoiseModel{});
    const auto center_ray = data.rays[2];
    CHECK(center_ray.b == Catch::Approx(value * 2.0 * radius));
}

TEST_CASE("noisy projections are reproducible for a fixed seed") {
    const auto phantom = uniform_disk_phantom(0.2, 3.0, 10.0);
    const ScanGeometry geometry{2, 90.0, 7, 1.0, 3};
    NoiseModel noise;
    noise.noiseless = false;
    noise.photons_per_ray = 100000;
    noise.scatter_fraction = 0.05;
    noise.seed = 777;

    const auto a = simulate_projections(phantom, geometry, noise);
    const auto b = simulate_projections(phantom, geometry, noise);
    REQUIRE(a.rays.size() == b.rays.size());
    for (std::size_t i = 0; i < a.rays.size(); ++i) CHECK(a.rays[i].b == b.rays[i].b);

    noise.seed = 778;
    const auto c = simulate_projections(phantom, geometry, noise);
    bool any_different = false;
    for (std::size_t i = 0; i < a.rays.size(); ++i)
        if (a.rays[i].b != c.rays[i].b) any_different = true;
    CHECK(any_different);
}

TEST_CASE("scatter redistribution conserves photon counts per view") {
    const auto phantom = uniform_disk_phantom(0.3, 3.5, 10.0);
    const ScanGeometry geometry{2, 90.0, 9, 1.0, 5};
    NoiseModel with_scatter;
    with_scatter.noiseless = false;
    with_scatter.photons_per_ray = 500000;
    with_scatter.scatter_fraction = 0.05;
    with_scatter.seed = 99;
    NoiseModel no_scatter = with_scatter;
    no_scatter.scatter_fraction = 0.0;

    const auto a = simulate_projections(phantom, geometry, with_scatter);
    const auto b = simulate_projections(phantom, geometry, no_scatter);
    REQUIRE(a.floored_rays == 0);
    REQUIRE(b.floored_rays == 0);
    for (std::size_t v = 0; v < geometry.views; ++v) {
        double total_a = 0.0, total_b = 0.0;
        for (std::size_t r = 0; r < geometry.rays_per_view; ++r) {
            total_a += std::exp(-a.rays[v * 9 + r].b);
            total_b += std::exp(-b.rays[v * 9 + r].b);
        }
        CHECK(total_a == Catch::Approx(total_b).epsilon(1e-12));
    }
}

TEST_CASE("assemble_problem groups one block per view in the requested order") {
    const auto phantom = uniform_disk_phantom(0.2, 3.0, 10.0);
    const ScanGeometry geometry{6, 30.0, 9, 1.0, 1};
    const ImageGrid grid{8, 10.0 / 8.0};
    const auto data = simulate_projections(phantom, geometry, NoiseModel{});

    const auto sequential = assemble_problem(data, grid, sequential_view_order(6));
    CHECK(sequential.problem.block_count() == 6);
    CHECK(sequential.problem.dimension() == 64);

    const auto efficient = assemble_problem(data, grid, efficient_view_order(6));
    CHECK(efficient.problem.block_count() == 6);
    CHECK(efficient.problem.equation_count() == sequential.problem.equation_count());
    CHECK(efficient.dropped_rows == sequential.dropped_rows);

    // Same equations regardless of block order: the residual is order-free.
    Point x(64);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = 0.01 * static_cast<double>(j % 7);
    CHECK(res(sequential.problem, x) == Catch::Approx(res(efficient.problem, x)).epsilon(1e-12));
}

TEST_CASE("noise strictly increases the phantom residual on a tiny scan") {
    // A rectangle aligned to pixel boundaries rasterizes exactly, so the
    // noiseless self-residual is pure round-off and any noise realization
    // must push it up.
    Phantom phantom;
    phantom.extent = 10.0;
    phantom.shapes = {Rectangle{0.0, 0.0, 1.25, 1.875, 0.21}};
    const ScanGeometry geometry{4, 45.0, 13, 0.7, 1};
    const ImageGrid grid{16, 10.0 / 16.0};
    const auto truth = rasterize_phantom(phantom, 16, 7);

    const auto clean = simulate_projections(phantom, geometry, NoiseModel{});
    NoiseModel noisy;
    noisy.noiseless = false;
    noisy.photons_per_ray = 20000;
    noisy.scatter_fraction = 0.05;
    noisy.seed = 4242;
    const auto dirty = simulate_projections(phantom, geometry, noisy);

    const double res_clean = res(assemble_problem(clean, grid, sequential_view_order(4)).problem,
                                 truth.values);
    const double res_noisy = res(assemble_problem(dirty, grid, sequential_view_order(4)).problem,
                                 truth.values);
    CHECK(res_clean < 1e-10);
    CHECK(res_noisy > res_clean);
}

TEST_CASE("finer grids and subsampling shrink the noiseless self-residual") {
    const auto phantom = desk_phantom(10.0);
    const ScanGeometry geometry{4, 45.0, 15, 0.6, 1};
    const auto data = simulate_projections(phantom, geometry, NoiseModel{});

    const auto residual_at = [&](std::size_t side, std::size_t subsample) {
        const ImageGrid grid{side, 10.0 / static_cast<double>(side)};
        const auto assembled = assemble_problem(data, grid, sequential_view_order(4));
        const auto truth = rasterize_phantom(phantom, side, subsample);
        return res(assembled.problem, truth.values);
    };
    const double coarse = residual_at(12, 1);
    const double fine = residual_at(40, 5);
    CHECK(fine < coarse);
}

TEST_CASE("assemble_problem rejects degenerate scans and bad orderings") {
    const auto phantom = uniform_disk_phantom(0.2, 3.0, 10.0);
    const ScanGeometry geometry{1, 0.0, 2, 1000.0, 1};  // every ray misses
    const ImageGrid grid{4, 1.0};
    const auto data = simulate_projections(phantom, geometry, NoiseModel{});
    CHECK_THROWS(assemble_problem(data, grid, sequential_view_order(1)));

    const ScanGeometry ok_geometry{2, 90.0, 3, 1.0, 1};
    const auto ok_data = simulate_projections(phantom, ok_geometry, NoiseModel{});
    CHECK_THROWS(assemble_problem(ok_data, ImageGrid{4, 1.0}, {0, 0}));
    CHECK_THROWS(assemble_problem(ok_data, ImageGrid{4, 1.0}, {0}));
}

TEST_CASE("projection data round-trips through the text format") {
    const auto phantom = desk_phantom(12.0);
    const ScanGeometry geometry{3, 60.0, 7, 0.9, 5};
    NoiseModel noise;
    noise.noiseless = false;
    noise.photons_per_ray = 50000;
    noise.scatter_fraction = 0.03;
    noise.seed = 31337;
    const auto data = simulate_projections(phantom, geometry, noise);

    std::stringstream stream;
    save_projections(data, stream);
    const auto loaded = load_projections(stream);

    CHECK(loaded.geometry.views == geometry.views);
    CHECK(loaded.geometry.angular_increment_deg == geometry.angular_increment_deg);
    CHECK(loaded.geometry.rays_per_view == geometry.rays_per_view);
    CHECK(loaded.geometry.ray_spacing == geometry.ray_spacing);
    CHECK(loaded.geometry.detector_subrays == geometry.detector_subrays);
    CHECK(loaded.noise.noiseless == noise.noiseless);
    CHECK(loaded.noise.photons_per_ray == noise.photons_per_ray);
    CHECK(loaded.noise.scatter_fraction == noise.scatter_fraction);
    CHECK(loaded.noise.seed == noise.seed);
    CHECK(loaded.floored_rays == data.floored_rays);
    REQUIRE(loaded.rays.size() == data.rays.size());
    for (std::size_t i = 0; i < data.rays.size(); ++i) {
        CHECK(loaded.rays[i].view == data.rays[i].view);
        CHECK(loaded.rays[i].ray == data.rays[i].ray);
        CHECK(loaded.rays[i].b == data.rays[i].b);
    }
}

TEST_CASE("load_projections rejects malformed streams") {
    std::stringstream bad("supr-proj 2\n");
    CHECK_THROWS(load_projections(bad));
    std::stringstream unknown("supr-proj 1\nviews 1\nwat 3\n");
    CHECK_THROWS(load_projections(unknown));
    std::stringstream truncated("supr-proj 1\nviews 1\nrays 5\n0 0 1.0\n");
    CHECK_THROWS(load_projections(truncated));
}

TEST_CASE("simulate_projections validates noise parameters") {
    const Phantom empty{{}, 10.0};
    const ScanGeometry geometry{1, 0.0, 1, 1.0, 1};
    NoiseModel bad;
    bad.noiseless = false;
    bad.photons_per_ray = 0;
    CHECK_THROWS(simulate_projections(empty, geometry, bad));
    bad.photons_per_ray = 100;
    bad.scatter_fraction = 1.0;
    CHECK_THROWS(simulate_projections(empty, geometry, bad));
}
