#include <cmath>
#include <cstring>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "matt/numeric.hpp"

using namespace matt;
using testing::central_diff;
using testing::random_vector;
using testing::rel_err;

TEST_CASE("matrix basics") {
    Matrix m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    m(1, 2) = -4.0;
    CHECK(m[5] == -4.0);
    CHECK(m.row(1)[2] == -4.0);
    CHECK(m.all_finite());
    m(0, 0) = std::nan("");
    CHECK_FALSE(m.all_finite());
    const auto id = Matrix::identity(3);
    CHECK(id(1, 1) == 1.0);
    CHECK(id(0, 1) == 0.0);
    const std::vector<double> v{1, 2, 3};
    const auto col = Matrix::column(v);
    CHECK(col.rows() == 3);
    CHECK(col.cols() == 1);
}

TEST_CASE("param store rejects duplicates and compares bitwise") {
    ParamStore a;
    a.add("w", Matrix(2, 2, 1.0));
    CHECK_THROWS(a.add("w", Matrix(1, 1)));
    CHECK(a.contains("w"));
    CHECK_FALSE(a.contains("v"));
    ParamStore b;
    b.add("w", Matrix(2, 2, 1.0));
    CHECK(a.same_values(b));
    b.at("w").value(0, 0) = std::nextafter(1.0, 2.0);
    CHECK_FALSE(a.same_values(b));
}

TEST_CASE("derive_seed is deterministic and separates streams") {
    CHECK(derive_seed(5, 1) == derive_seed(5, 1));
    CHECK(derive_seed(5, 1) != derive_seed(5, 2));
    CHECK(derive_seed(5, 1) != derive_seed(6, 1));
}

TEST_CASE("xavier uniform bound, spread and determinism") {
    const auto w = xavier_uniform(40, 60, 9);
    const double bound = std::sqrt(6.0 / 100.0);
    double lo = 0;
    double hi = 0;
    double sumsq = 0;
    for (double v : w.data()) {
        CHECK(std::abs(v) <= bound);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sumsq += v * v;
    }
    // Uniform on [-a, a] has variance a^2 / 3.
    CHECK(sumsq / 2400.0 == doctest::Approx(bound * bound / 3.0).epsilon(0.08));
    CHECK(hi > 0.9 * bound);
    CHECK(lo < -0.9 * bound);
    CHECK(xavier_uniform(40, 60, 9) == w);
    CHECK_FALSE(xavier_uniform(40, 60, 10) == w);
}

TEST_CASE("affine forward and backward match finite differences") {
    std::mt19937_64 rng(1);
    Matrix w(3, 4);
    for (auto& v : w.data()) v = random_vector(rng, 1)[0];
    auto x = random_vector(rng, 4);
    const auto b = random_vector(rng, 3);
    const auto dy = random_vector(rng, 3);
    const auto y = affine(w, x, b);
    for (std::size_t r = 0; r < 3; ++r) {
        double expect = b[r];
        for (std::size_t c = 0; c < 4; ++c) expect += w(r, c) * x[c];
        CHECK(y[r] == doctest::Approx(expect).epsilon(1e-14));
    }
    Matrix dw(3, 4);
    Vector db(3, 0.0);
    Vector dx(4, 0.0);
    affine_backward(w, x, dy, dw, db, dx);
    const auto loss = [&](const Matrix& ww, const Vector& xx, const Vector& bb) {
        const auto yy = affine(ww, xx, bb);
        return dot(yy, dy);
    };
    for (std::size_t i = 0; i < 4; ++i) {
        const double num = central_diff(
            [&](double v) {
                auto xx = x;
                xx[i] = v;
                return loss(w, xx, b);
            },
            x[i]);
        CHECK(testing::fd_close(dx[i], num));
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double num = central_diff(
            [&](double v) {
                auto ww = w;
                ww[i] = v;
                return loss(ww, x, b);
            },
            w[i]);
        CHECK(testing::fd_close(dw[i], num));
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(db[i] == doctest::Approx(dy[i]));

    // Accumulation: a second backward doubles the gradients.
    affine_backward(w, x, dy, dw, db, dx);
    CHECK(db[0] == doctest::Approx(2.0 * dy[0]));
}

TEST_CASE("tanh, softmax, concat and weighted sum backward") {
    std::mt19937_64 rng(2);
    const auto x = random_vector(rng, 5, 2.0);
    const auto dy = random_vector(rng, 5);

    SUBCASE("tanh") {
        const auto y = tanh_forward(x);
        Vector dx(5, 0.0);
        tanh_backward(y, dy, dx);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(y[i] == doctest::Approx(std::tanh(x[i])));
            CHECK(rel_err(dx[i], dy[i] * (1 - std::tanh(x[i]) * std::tanh(x[i]))) < 1e-12);
        }
    }
    SUBCASE("softmax") {
        const auto p = softmax(x);
        double total = 0;
        for (double v : p) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
        // Shift invariance, including large offsets that would overflow exp.
        auto shifted = x;
        for (auto& v : shifted) v += 1000.0;
        const auto ps = softmax(shifted);
        for (std::size_t i = 0; i < 5; ++i) CHECK(ps[i] == doctest::Approx(p[i]).epsilon(1e-12));
        Vector dx(5, 0.0);
        softmax_backward(p, dy, dx);
        for (std::size_t i = 0; i < 5; ++i) {
            const double num = central_diff(
                [&](double v) {
                    auto xx = x;
                    xx[i] = v;
                    return dot(softmax(xx), dy);
                },
                x[i]);
            CHECK(testing::fd_close(dx[i], num));
        }
    }
    SUBCASE("vconcat") {
        const Vector a{1, 2};
        const Vector b{3};
        CHECK(vconcat(a, b) == Vector{1, 2, 3});
        Vector da(2, 0.0);
        Vector dbv(1, 0.0);
        vconcat_backward(Vector{4, 5, 6}, da, dbv);
        CHECK(da == Vector{4, 5});
        CHECK(dbv == Vector{6});
    }
    SUBCASE("weighted sum") {
        const std::vector<Vector> vs{random_vector(rng, 3), random_vector(rng, 3)};
        const Vector w{0.25, 0.75};
        const auto g = weighted_sum(w, vs);
        CHECK(g[1] == doctest::Approx(0.25 * vs[0][1] + 0.75 * vs[1][1]));
        const Vector dg{1.0, -2.0, 0.5};
        Vector dw(2, 0.0);
        std::vector<Vector> dvs(2, Vector(3, 0.0));
        weighted_sum_backward(w, vs, dg, dw, dvs);
        CHECK(dw[0] == doctest::Approx(dot(dg, vs[0])));
        CHECK(dvs[1][2] == doctest::Approx(0.75 * 0.5));
    }
}

TEST_CASE("sgd step is exact and zeroes gradients") {
    ParamStore p;
    p.add("w", Matrix(1, 2, 1.0));
    p.at("w").grad(0, 0) = 0.5;
    p.at("w").grad(0, 1) = -2.0;
    Optimizer opt({OptimizerKind::Sgd, 0.1});
    opt.step(p);
    CHECK(p.at("w").value(0, 0) == doctest::Approx(0.95));
    CHECK(p.at("w").value(0, 1) == doctest::Approx(1.2));
    CHECK(p.at("w").grad(0, 0) == 0.0);
    CHECK(opt.steps() == 1);
}

TEST_CASE("adam matches a hand-computed two-step trajectory") {
    ParamStore p;
    p.add("w", Matrix(1, 1, 0.0));
    OptimizerConfig cfg;
    cfg.learning_rate = 0.01;
    Optimizer opt(cfg);
    const double g1 = 0.3;
    const double g2 = -0.1;
    p.at("w").grad(0, 0) = g1;
    opt.step(p);
    // First bias-corrected step is lr * g / (|g| + eps') ~ lr * sign(g).
    double m = 0.1 * g1;
    double v = 0.001 * g1 * g1;
    double w = -0.01 * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
    CHECK(p.at("w").value(0, 0) == doctest::Approx(w).epsilon(1e-12));
    p.at("w").grad(0, 0) = g2;
    opt.step(p);
    m = 0.9 * m + 0.1 * g2;
    v = 0.999 * v + 0.001 * g2 * g2;
    w -= 0.01 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(p.at("w").value(0, 0) == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("optimizer leaves parameters with zero gradient untouched") {
    ParamStore p;
    p.add("a", Matrix(2, 2, 0.5));
    p.add("b", Matrix(1, 3, -0.5));
    p.at("a").grad(1, 0) = 1.0;
    Optimizer opt(OptimizerConfig{});
    opt.step(p);
    CHECK(p.at("a").value(0, 0) == 0.5);
    CHECK(p.at("a").value(1, 0) != 0.5);
    for (double v : p.at("b").value.data()) CHECK(v == -0.5);
}

TEST_CASE("non-finite gradient raises DivergedError without updating") {
    ParamStore p;
    p.add("w", Matrix(1, 2, 1.0));
    p.at("w").grad(0, 1) = std::numeric_limits<double>::infinity();
    Optimizer opt(OptimizerConfig{});
    CHECK_MATT_ERROR(opt.step(p), ErrorCode::DivergedError);
    CHECK(p.at("w").value(0, 0) == 1.0);
}

TEST_CASE("parse_optimizer_kind") {
    CHECK(parse_optimizer_kind("adam") == OptimizerKind::Adam);
    CHECK(parse_optimizer_kind("sgd") == OptimizerKind::Sgd);
    CHECK_MATT_ERROR(parse_optimizer_kind("rmsprop"), ErrorCode::InvalidConfig);
}

TEST_CASE("gradient checker accepts a correct gradient and flags a wrong one") {
    ParamStore p;
    p.add("w", Matrix(2, 3));
    std::mt19937_64 rng(3);
    for (auto& v : p.at("w").value.data()) v = random_vector(rng, 1)[0];
    // loss = sum sin(w_i) * i
    const auto loss = [&] {
        double s = 0;
        const auto d = p.at("w").value.data();
        for (std::size_t i = 0; i < d.size(); ++i) s += std::sin(d[i]) * static_cast<double>(i + 1);
        return s;
    };
    const auto set_grad = [&](double scale) {
        const auto d = p.at("w").value.data();
        auto g = p.at("w").grad.data();
        for (std::size_t i = 0; i < d.size(); ++i) g[i] = scale * std::cos(d[i]) * static_cast<double>(i + 1);
    };
    set_grad(1.0);
    const auto before = p.at("w").value;
    auto report = finite_difference_check(loss, p);
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-8);
    CHECK(p.at("w").value == before);

    set_grad(1.01);
    report = finite_difference_check(loss, p);
    CHECK_FALSE(report.passed);
    CHECK(report.params[0].max_rel_error == doctest::Approx(0.01 / 1.01).epsilon(1e-3));
}

TEST_CASE("gradient checker subsamples large tensors") {
    ParamStore p;
    p.add("big", Matrix(20, 20, 0.1));
    const auto loss = [&] {
        double s = 0;
        for (double v : p.at("big").value.data()) s += v * v;
        return s;
    };
    for (std::size_t i = 0; i < 400; ++i) p.at("big").grad[i] = 0.2;
    GradCheckOptions opts;
    const auto report = finite_difference_check(loss, p, opts);
    CHECK(report.params[0].checked == opts.sample_size);
    CHECK(report.passed);
}

TEST_CASE("checkpoint byte layout and round trip") {
    ParamStore p;
    p.add("ab", Matrix(1, 2, std::vector<double>{1.0, -2.5}));
    const auto bytes = encode_checkpoint(p);
    // Independent layout oracle.
    std::string expect = "MATT";
    const auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) expect.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put32(1);
    put32(1);
    expect.push_back(2);
    expect.push_back(0);
    expect += "ab";
    put32(1);
    put32(2);
    for (double d : {1.0, -2.5}) {
        std::uint64_t u;
        std::memcpy(&u, &d, 8);
        for (int i = 0; i < 8; ++i) expect.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
    }
    CHECK(bytes == expect);
    const auto back = decode_checkpoint(bytes);
    CHECK(back.same_values(p));

    CHECK_MATT_ERROR(decode_checkpoint("MATX" + bytes.substr(4)), ErrorCode::FormatError);
    CHECK_MATT_ERROR(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), ErrorCode::FormatError);
    CHECK_MATT_ERROR(decode_checkpoint(bytes + "x"), ErrorCode::FormatError);
}
