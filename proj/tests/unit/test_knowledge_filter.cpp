#include <doctest.h>

#include <cmath>
#include <random>

#include "check_kind.hpp"
#include "kgprompt/knowledge_filter.hpp"
#include "oracles.hpp"

using namespace kgprompt;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double s = 1.0) {
    std::normal_distribution<double> d(0.0, s);
    Matrix m(r, c);
    for (double& x : m.flat()) x = d(rng);
    return m;
}

Vector random_vector(std::mt19937_64& rng, std::size_t n, double s = 1.0) {
    std::normal_distribution<double> d(0.0, s);
    Vector v(n);
    for (double& x : v) x = d(rng);
    return v;
}

KnowledgeFilter identity_filter(std::size_t m) { return {Matrix::identity(m), Vector(m, 0.0)}; }

Vector row(const Matrix& m, std::size_t r) { return Vector(m.row(r).begin(), m.row(r).end()); }

}  // namespace

TEST_SUITE("knowledge_filter") {

TEST_CASE("adaptation layer arithmetic") {
    AdaptationLayer zero{Matrix(3, 3), Vector(3, 0.0), Matrix(3, 3), Vector(3, 0.0)};
    CHECK(adapt_visual(Vector{1, 2, 3}, zero) == Vector{0, 0, 0});

    AdaptationLayer one{Matrix::from_rows({{2}}), {0}, Matrix::from_rows({{3}}), {1}};
    CHECK(adapt_visual(Vector{1}, one) == Vector{7});
    CHECK(adapt_visual(Vector{-1}, one) == Vector{1});

    AdaptationLayer neg{Matrix::from_rows({{1, 1}, {2, 0}}), {0, 0}, Matrix::from_rows({{5, 5}, {1, 1}}), {0.5, -2}};
    CHECK(adapt_visual(Vector{-1, -1}, neg) == Vector{0.5, -2});
    CHECK_KIND(adapt_visual(Vector{1, 2, 3}, neg), ErrorKind::DimensionMismatch);
}

TEST_CASE("attention weights match a direct softmax") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + trial % 8;
        const std::size_t n = 1 + trial % 11;
        const Matrix rows = random_matrix(rng, n, m);
        const Vector v = random_vector(rng, m);
        std::vector<double> logits;
        for (std::size_t i = 0; i < n; ++i) logits.push_back(oracle::dot(row(rows, i), v) / std::sqrt(double(m)));
        const auto expect = oracle::softmax(logits);
        const auto got = attention_weights(rows, v);
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("attention is stable for large logits") {
    const Matrix rows = Matrix::from_rows({{1000, 0}, {-1000, 0}});
    const auto w = attention_weights(rows, Vector{10, 0});
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 0.0);
}

TEST_CASE("filter special cases") {
    const KnowledgeFilter psi{Matrix::from_rows({{2, 0}, {1, 1}}), {0.5, 0}};
    const Matrix single = Matrix::from_rows({{3, -1}});
    CHECK(attention_weights(single, Vector{5, 5}) == Vector{1.0});
    CHECK(filter(single, Vector{5, 5}, psi) == Vector{6.5, 2});

    const Matrix same = Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}});
    CHECK(filter(same, Vector{9, -4}, psi) == filter(same, Vector{-3, 7}, psi));
    CHECK(filter(same, Vector{9, -4}, psi) == Vector{2.5, 3});

    // Orthogonal visual feature: zero logits, uniform weights.
    const Matrix rows = Matrix::from_rows({{1, 0, 0}, {2, 0, 0}, {0, 0, 4}});
    const Vector v{0, 1, 0};
    const auto w = attention_weights(rows, v);
    for (double x : w) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto out = filter(rows, v, identity_filter(3));
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[2] == doctest::Approx(4.0 / 3.0));
    CHECK_KIND(filter(rows, Vector{1, 2}, identity_filter(3)), ErrorKind::DimensionMismatch);
}

TEST_CASE("weights always form a distribution") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + trial % 16;
        const std::size_t n = 1 + (trial * 7) % 23;
        const auto w = attention_weights(random_matrix(rng, n, m, 5.0), random_vector(rng, m, 5.0));
        double s = 0.0;
        for (double x : w) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            s += x;
        }
        CHECK(std::abs(s - 1.0) <= 1e-6);
    }
}

TEST_CASE("row permutation leaves the output unchanged") {
    std::mt19937_64 rng(5);
    const Matrix rows = random_matrix(rng, 5, 4);
    const Vector v = random_vector(rng, 4);
    const KnowledgeFilter f{random_matrix(rng, 4, 4), random_vector(rng, 4)};
    Matrix perm(5, 4);
    const std::size_t order[5] = {0, 3, 1, 4, 2};
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 4; ++j) perm(i, j) = rows(order[i], j);
    }
    const auto a = filter(rows, v, f);
    const auto b = filter(perm, v, f);
    for (std::size_t j = 0; j < 4; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
}

TEST_CASE("zero padding rescales logits by the width ratio") {
    std::mt19937_64 rng(8);
    const std::size_t m = 4;
    const Matrix rows = random_matrix(rng, 3, m);
    const Vector v = random_vector(rng, m);
    Matrix padded(3, 2 * m);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < m; ++j) padded(i, j) = rows(i, j);
    }
    Vector vp(2 * m, 0.0);
    std::copy(v.begin(), v.end(), vp.begin());
    std::vector<double> logits;
    for (std::size_t i = 0; i < 3; ++i) {
        logits.push_back(oracle::dot(row(rows, i), v) / std::sqrt(double(m)) * std::sqrt(double(m) / double(2 * m)));
    }
    const auto expect = oracle::softmax(logits);
    const auto got = attention_weights(padded, vp);
    for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("prompt composition order") {
    const Matrix ctx = Matrix::from_rows({{3, 3}, {4, 4}});
    const auto p = compose_prompt(Vector{1, 1}, Vector{2, 2}, ctx, Vector{5, 5});
    REQUIRE(p.rows.rows() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(p.rows(i, 0) == double(i + 1));
    const auto one = compose_prompt(Vector{1, 1}, Vector{2, 2}, Matrix::from_rows({{3, 3}}), Vector{5, 5});
    CHECK(one.rows.rows() == 4);
    const auto swapped = compose_prompt(Vector{2, 2}, Vector{1, 1}, ctx, Vector{5, 5});
    CHECK(swapped.rows(0, 0) == 2.0);
    CHECK(swapped.rows(1, 0) == 1.0);
    for (std::size_t i = 2; i < 5; ++i) CHECK(row(swapped.rows, i) == row(p.rows, i));
    CHECK_KIND(compose_prompt(Vector{1}, Vector{2, 2}, ctx, Vector{5, 5}), ErrorKind::DimensionMismatch);
}

TEST_CASE("text encoding is unit norm") {
    const MeanPoolTextEncoder enc;
    const auto t = encode_text({Matrix::from_rows({{1, 0}, {0, 1}})}, enc);
    CHECK(t[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(t[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto p = ComposedPrompt{random_matrix(rng, 5, 7)};
        const auto f = encode_text(p, enc);
        CHECK(std::abs(norm(f) - 1.0) <= 1e-6);
        CHECK(f == encode_text(p, enc));
    }
    CHECK_KIND(encode_text({Matrix::from_rows({{1, 0}, {-1, 0}})}, enc), ErrorKind::EncoderFailure);
}

TEST_CASE("filter gradient matches finite differences") {
    // Scalar objective L = c . filter(rows, v); gradients with respect to psi,
    // v and the rows, derived by hand and checked numerically.
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + trial % 5;
        const std::size_t n = 1 + trial % 6;
        Matrix rows = random_matrix(rng, n, m);
        Vector v = random_vector(rng, m);
        KnowledgeFilter f{random_matrix(rng, m, m), random_vector(rng, m)};
        const Vector c = random_vector(rng, m);
        auto loss = [&] { return oracle::dot(c, filter(rows, v, f)); };

        const auto tr = filter_traced(rows, v, f);
        Vector g_pooled(m, 0.0);
        matvec_t_acc(f.psi, c, g_pooled);
        Vector ga(n);
        for (std::size_t i = 0; i < n; ++i) ga[i] = oracle::dot(row(rows, i), g_pooled);
        double mean_ga = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_ga += tr.weights[i] * ga[i];
        Vector gz(n);
        for (std::size_t i = 0; i < n; ++i) gz[i] = tr.weights[i] * (ga[i] - mean_ga) / std::sqrt(double(m));

        const double h = 1e-6;
        auto fd = [&](double& x) {
            const double o = x;
            x = o + h;
            const double lp = loss();
            x = o - h;
            const double lm = loss();
            x = o;
            return (lp - lm) / (2 * h);
        };
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) CHECK(fd(f.psi(a, b)) == doctest::Approx(c[a] * tr.pooled[b]).epsilon(1e-5));
        }
        for (std::size_t j = 0; j < m; ++j) {
            double gv = 0.0;
            for (std::size_t i = 0; i < n; ++i) gv += gz[i] * rows(i, j);
            CHECK(fd(v[j]) == doctest::Approx(gv).epsilon(1e-5).scale(1.0));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double gr = tr.weights[i] * g_pooled[j] + gz[i] * v[j];
                CHECK(fd(rows(i, j)) == doctest::Approx(gr).epsilon(1e-5).scale(1.0));
            }
        }
    }
}

}
