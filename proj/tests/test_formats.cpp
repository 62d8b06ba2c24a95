#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "supr/config.hpp"
#include "supr/pgm.hpp"
#include "supr/trace.hpp"

using namespace supr;

TEST_CASE("write_image maps the display window linearly with round-half-up") {
    // Window (0, 2) is exactly representable, so the midpoint sits at 127.5
    // and the documented round-half-up rule decides.
    const double low = 0.0, high = 2.0;
    PixelImage im{Point{low, high, 1.0, low - 1.0}, 2};
    std::stringstream out;
    write_image(im, low, high, out);
    const std::string s = out.str();

    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(s.size() == header.size() + 4);
    CHECK(s.substr(0, header.size()) == header);
    const auto* bytes = reinterpret_cast<const unsigned char*>(s.data() + header.size());
    CHECK(bytes[0] == 0);    // window low
    CHECK(bytes[1] == 255);  // window high
    CHECK(bytes[2] == 128);  // midpoint rounds up
    CHECK(bytes[3] == 0);    // below the window clips
}

TEST_CASE("write_image clips above the window and handles the narrow preset") {
    const double low = 0.204, high = 0.21675;
    PixelImage im{Point{high + 1.0, low, 0.21, 0.204}, 2};
    std::stringstream out;
    write_image(im, low, high, out);
    const std::string s = out.str();
    const auto* bytes = reinterpret_cast<const unsigned char*>(s.data() + s.size() - 4);
    CHECK(bytes[0] == 255);
    CHECK(bytes[1] == 0);
    const double expected = std::floor((0.21 - low) / (high - low) * 255.0 + 0.5);
    CHECK(bytes[2] == static_cast<unsigned char>(expected));
    CHECK(bytes[3] == 0);
}

TEST_CASE("write_image rejects an inverted window") {
    PixelImage im{Point(4, 0.0), 2};
    std::stringstream out;
    CHECK_THROWS(write_image(im, 1.0, 0.5, out));
}

TEST_CASE("trace files round-trip") {
    TraceMeta meta;
    meta.method = "standard";
    meta.steering_steps = 3;
    meta.gamma_ratio = 0.99995;
    meta.epsilon = 0.33;
    meta.defined = true;
    std::vector<TraceRow> rows{
        {0, 5.0, 100.0, 0.0, 0.0, -1},
        {1, 2.0, 80.0, std::pow(0.99995, 2.0), 1.5, 2},
        {2, 0.3, 60.0, std::pow(0.99995, 5.0), 2.0, 5},
    };
    std::stringstream stream;
    write_trace(meta, rows, stream);
    const LoadedTrace loaded = read_trace(stream);

    CHECK(loaded.meta.method == meta.method);
    CHECK(loaded.meta.steering_steps == meta.steering_steps);
    CHECK(loaded.meta.gamma_ratio == meta.gamma_ratio);
    CHECK(loaded.meta.epsilon == meta.epsilon);
    CHECK(loaded.meta.defined == meta.defined);
    REQUIRE(loaded.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded.rows[i].k == rows[i].k);
        CHECK(loaded.rows[i].res == rows[i].res);
        CHECK(loaded.rows[i].phi == rows[i].phi);
        CHECK(loaded.rows[i].step_beta == rows[i].step_beta);
        CHECK(loaded.rows[i].step_vnorm == rows[i].step_vnorm);
        CHECK(loaded.rows[i].cursor == rows[i].cursor);
    }
    CHECK(verify_trace(loaded).empty());
}

TEST_CASE("verify_trace flags inconsistent bookkeeping") {
    LoadedTrace t;
    t.meta.method = "standard";
    t.meta.steering_steps = 2;
    t.meta.gamma_ratio = 0.9;
    t.meta.epsilon = 1.0;
    t.meta.defined = true;
    t.rows = {
        {0, 5.0, 10.0, 0.0, 0.0, -1},
        {1, 2.0, 8.0, std::pow(0.9, 1.0), 1.0, 1},
        {2, 0.5, 6.0, std::pow(0.9, 3.0), 1.2, 3},
    };
    CHECK(verify_trace(t).empty());

    SECTION("beta off the schedule") {
        t.rows[1].step_beta = 0.85;
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("beta drawn outside the cursor window") {
        t.rows[2].step_beta = std::pow(0.9, 1.0);  // already consumed in step 1
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("cursor going backwards") {
        t.rows[2].cursor = 0;
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("cursor advancing less than the steering count") {
        t.rows[2].cursor = 2;
        t.rows[2].step_beta = std::pow(0.9, 2.0);
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("steering vector norm above the bound") {
        t.rows[1].step_vnorm = 2.5;
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("defined status but final res above epsilon") {
        t.rows[2].res = 2.0;
        CHECK_FALSE(verify_trace(t).empty());
    }
    SECTION("plain runs must carry no bookkeeping") {
        t.meta.method = "plain";
        CHECK_FALSE(verify_trace(t).empty());
    }
}

TEST_CASE("config files parse with comments and defaults") {
    std::stringstream in(
        "# reconstruction setup\n"
        "phantom = desk\n"
        "side = 32\n"
        "views = 10        # sparse\n"
        "epsilon = 0.5\n"
        "superiorize = standard\n"
        "N = 5\n"
        "a = 0.999\n"
        "apply_nonneg = false\n"
        "\n");
    const RunConfig config = parse_config(in);
    CHECK(config.phantom == "desk");
    CHECK(config.side == 32);
    CHECK(config.views == 10);
    CHECK(config.epsilon == 0.5);
    CHECK(config.steering_steps == 5);
    CHECK(config.gamma_ratio == 0.999);
    CHECK_FALSE(config.apply_nonneg);
    CHECK(config.rays_per_view == 96);  // untouched default
    config.validate();
}

TEST_CASE("config parsing rejects unknown keys and malformed lines") {
    std::stringstream unknown("no_such_key = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::stringstream malformed("epsilon 0.5\n");
    CHECK_THROWS_AS(parse_config(malformed), ConfigError);
    std::stringstream bad_number("epsilon = abc\n");
    CHECK_THROWS_AS(parse_config(bad_number), ConfigError);
    std::stringstream bad_bool("apply_nonneg = maybe\n");
    CHECK_THROWS_AS(parse_config(bad_bool), ConfigError);
}

TEST_CASE("config validation enforces the documented invariants") {
    RunConfig config;
    config.validate();  // defaults are valid

    SECTION("negative epsilon") {
        config.epsilon = -0.1;
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SECTION("window must be increasing") {
        config.window_low = config.window_high;
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SECTION("gamma ratio range") {
        config.gamma_ratio = 1.0;
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SECTION("algorithm names") {
        config.algorithm = "FBP";
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SECTION("superiorize mode names") {
        config.superiorize = "sometimes";
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
}

TEST_CASE("config builders expose the scan description") {
    RunConfig config;
    config.side = 16;
    config.extent = 8.0;
    const ImageGrid grid = config.make_grid();
    CHECK(grid.side == 16);
    CHECK(grid.pixel_size == Catch::Approx(0.5));

    const ScanGeometry geom = config.make_geometry();
    CHECK(geom.views == config.views);
    CHECK(geom.total_rays() == config.views * config.rays_per_view);

    config.noise = "none";
    CHECK(config.make_noise().noiseless);
    config.noise = "poisson";
    CHECK_FALSE(config.make_noise().noiseless);

    config.phantom = "empty";
    CHECK(config.make_phantom().shapes.empty());
    config.phantom = "desk";
    CHECK_FALSE(config.make_phantom().shapes.empty());
}
