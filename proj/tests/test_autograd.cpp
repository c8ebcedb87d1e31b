#include <gtest/gtest.h>

#include <dismantler/autograd.hpp>

#include "support.hpp"

using namespace dismantler;
using namespace testing_support;
namespace ad = dismantler::ad;

namespace {

constexpr int kTrials = 50;
constexpr double kTol = 1e-4;

// Entries bounded away from zero so ReLU kinks never sit inside the stencil.
Matrix away_from_zero(std::size_t r, std::size_t c, Rng &rng) {
    Matrix m = random_matrix(r, c, rng, 0.05, 1.5);
    for (auto &x : m.data())
        if (rng.bernoulli(0.5)) x = -x;
    return m;
}

// A random weighted sum turns any output into a scalar with non-uniform
// upstream gradients.
ad::Var weighted(ad::Tape &t, const ad::Var &y, std::uint64_t seed) {
    Rng rng(seed);
    return ad::reduce_sum(ad::mul(y, t.constant(random_matrix(y.rows(), y.cols(), rng))));
}

ad::Index random_ids(std::size_t n, std::size_t segments, Rng &rng) {
    std::vector<std::uint32_t> ids(n);
    for (auto &x : ids) x = static_cast<std::uint32_t>(rng.below(segments));
    return ad::make_index(std::move(ids));
}

template <class Build>
void check_op(const char *name, Build build) {
    Rng rng(std::hash<std::string>{}(name));
    double worst = 0.0;
    for (int trial = 0; trial < kTrials; ++trial) worst = std::max(worst, build(rng, trial));
    EXPECT_LT(worst, kTol) << name;
}

} // namespace

TEST(Gradcheck, Matmul4x3By3x2) {
    Rng rng(1);
    const double err = gradcheck(
        [](ad::Tape &t, std::vector<ad::Var> &x) { return weighted(t, ad::matmul(x[0], x[1]), 5); },
        {random_matrix(4, 3, rng), random_matrix(3, 2, rng)});
    EXPECT_LT(err, 1e-6);
}

TEST(Gradcheck, EveryOp) {
    check_op("matmul", [](Rng &rng, int trial) {
        const auto n = 1 + rng.below(5), k = 1 + rng.below(5), m = 1 + rng.below(5);
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::matmul(x[0], x[1]), trial); },
                         {random_matrix(n, k, rng), random_matrix(k, m, rng)});
    });
    check_op("add", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::add(x[0], x[1]), trial); },
                         {random_matrix(3, 4, rng), random_matrix(3, 4, rng)});
    });
    check_op("mul", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::mul(x[0], x[1]), trial); },
                         {random_matrix(3, 4, rng), random_matrix(3, 4, rng)});
    });
    check_op("mul_col", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::mul_col(x[0], x[1]), trial); },
                         {random_matrix(5, 3, rng), random_matrix(5, 1, rng)});
    });
    check_op("add_bias", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::add_bias(x[0], x[1]), trial); },
                         {random_matrix(5, 3, rng), random_matrix(1, 3, rng)});
    });
    check_op("scale", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::scale(x[0], -2.5), trial); },
                         {random_matrix(3, 3, rng)});
    });
    check_op("relu", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::relu(x[0]), trial); },
                         {away_from_zero(4, 3, rng)});
    });
    check_op("leaky_relu", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::leaky_relu(x[0], 0.2), trial); },
                         {away_from_zero(4, 3, rng)});
    });
    check_op("sigmoid", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::sigmoid(x[0]), trial); },
                         {random_matrix(4, 3, rng, -4.0, 4.0)});
    });
    check_op("reciprocal_1p", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::reciprocal_1p(x[0]), trial); },
                         {random_matrix(4, 3, rng, 0.0, 3.0)});
    });
    check_op("log", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::log(x[0]), trial); },
                         {random_matrix(4, 3, rng, 0.2, 3.0)});
    });
    check_op("exp", [](Rng &rng, int trial) {
        return gradcheck([trial](ad::Tape &t, auto &x) { return weighted(t, ad::exp(x[0]), trial); },
                         {random_matrix(4, 3, rng, -2.0, 2.0)});
    });
    check_op("reduce_sum", [](Rng &rng, int) {
        return gradcheck([](ad::Tape &, auto &x) { return ad::reduce_sum(x[0]); }, {random_matrix(3, 5, rng)});
    });
    check_op("row_gather", [](Rng &rng, int trial) {
        auto idx = random_ids(9, 4, rng);
        return gradcheck([idx, trial](ad::Tape &t, auto &x) { return weighted(t, ad::row_gather(x[0], idx), trial); },
                         {random_matrix(4, 3, rng)});
    });
    check_op("segment_sum", [](Rng &rng, int trial) {
        auto ids = random_ids(9, 4, rng);
        return gradcheck(
            [ids, trial](ad::Tape &t, auto &x) { return weighted(t, ad::segment_sum(x[0], ids, 4), trial); },
            {random_matrix(9, 3, rng)});
    });
    check_op("segment_softmax", [](Rng &rng, int trial) {
        auto ids = random_ids(10, 3, rng);
        return gradcheck(
            [ids, trial](ad::Tape &t, auto &x) { return weighted(t, ad::segment_softmax(x[0], ids, 3), trial); },
            {random_matrix(10, 1, rng, -3.0, 3.0)});
    });
}

TEST(Gradcheck, ComposedChain) {
    Rng rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < kTrials; ++trial) {
        auto ids = random_ids(8, 3, rng);
        worst = std::max(worst, gradcheck(
                                    [ids](ad::Tape &, auto &x) {
                                        auto h = ad::leaky_relu(ad::add_bias(ad::matmul(x[0], x[1]), x[2]), 0.2);
                                        auto a = ad::segment_softmax(ad::matmul(h, x[3]), ids, 3);
                                        auto agg = ad::segment_sum(ad::mul_col(h, a), ids, 3);
                                        return ad::reduce_sum(ad::reciprocal_1p(ad::sigmoid(agg)));
                                    },
                                    {random_matrix(8, 3, rng), random_matrix(3, 4, rng), random_matrix(1, 4, rng),
                                     random_matrix(4, 1, rng)}));
    }
    EXPECT_LT(worst, kTol);
}

TEST(Ops, SegmentSoftmaxExamples) {
    ad::Tape t;
    auto ids = ad::make_index({0, 0, 0, 1, 1});
    auto y = ad::segment_softmax(t.constant(Matrix(5, 1, {2.0, 2.0, 2.0, -1.0, 3.0})), ids, 3);
    for (int e = 0; e < 3; ++e) EXPECT_NEAR(y.value()(e, 0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(y.value()(3, 0) + y.value()(4, 0), 1.0, 1e-12);
    EXPECT_GT(y.value()(3, 0), 0.0);
}

TEST(Ops, SegmentSoftmaxSumsToOneAndPositive) {
    Rng rng(3);
    for (int trial = 0; trial < kTrials; ++trial) {
        ad::Tape t;
        auto ids = random_ids(30, 6, rng);
        auto y = ad::segment_softmax(t.constant(random_matrix(30, 1, rng, -20.0, 20.0)), ids, 6);
        std::vector<double> sums(6, 0.0);
        std::vector<int> count(6, 0);
        for (std::size_t e = 0; e < 30; ++e) {
            EXPECT_GT(y.value()(e, 0), 0.0);
            sums[(*ids)[e]] += y.value()(e, 0);
            ++count[(*ids)[e]];
        }
        for (int s = 0; s < 6; ++s)
            if (count[s] > 0) EXPECT_NEAR(sums[s], 1.0, 1e-6);
    }
}

TEST(Ops, ShapeAndIndexErrors) {
    ad::Tape t;
    auto a = t.constant(Matrix(2, 3));
    auto b = t.constant(Matrix(2, 2));
    EXPECT_THROW(ad::add(a, b), ShapeError);
    EXPECT_THROW(ad::matmul(a, a), ShapeError);
    EXPECT_THROW(ad::mul_col(a, b), ShapeError);
    EXPECT_THROW(ad::segment_softmax(a, ad::make_index({0, 1}), 2), ShapeError);
    EXPECT_THROW(ad::segment_sum(a, ad::make_index({0, 5}), 2), std::exception);
    EXPECT_THROW(ad::row_gather(a, ad::make_index({3})), std::exception);
}

TEST(Ops, ReciprocalAtZeroAndNonFiniteTrips) {
    ad::Tape t;
    EXPECT_EQ(ad::reciprocal_1p(t.constant(Matrix(1, 1, 0.0))).item(), 1.0);
    EXPECT_THROW(ad::log(t.constant(Matrix(1, 1, 0.0))), ad::NumericError);
    EXPECT_THROW(ad::reciprocal_1p(t.constant(Matrix(1, 1, -1.0))), ad::NumericError);
}

TEST(Backward, SumGivesOnes) {
    ad::ParamStore store(1);
    auto &w = store.add("w", 3, 2);
    ad::Tape t;
    t.backward(ad::reduce_sum(t.param(w)));
    for (double g : w.grad.data()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SigmoidAtZero) {
    ad::ParamStore store;
    auto &w = store.add("w", 2, 2, ad::Init::Zeros);
    ad::Tape t;
    t.backward(ad::reduce_sum(ad::sigmoid(t.param(w))));
    for (double g : w.grad.data()) EXPECT_EQ(g, 0.25);
}

TEST(Backward, AccumulatesWithoutZeroGrad) {
    ad::ParamStore store;
    auto &w = store.add("w", 2, 2, ad::Init::Constant, 1.5);
    for (int i = 0; i < 3; ++i) {
        ad::Tape t;
        t.backward(ad::reduce_sum(t.param(w)));
    }
    for (double g : w.grad.data()) EXPECT_EQ(g, 3.0);
    store.zero_grad();
    for (double g : w.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NonScalarLossRejected) {
    ad::Tape t;
    auto x = t.leaf(Matrix(2, 2));
    EXPECT_THROW(t.backward(x), ShapeError);
}

TEST(ParamStore, InitializersAndNames) {
    ad::ParamStore store(4);
    auto &g = store.add("g", 10, 6);
    const double limit = std::sqrt(6.0 / 16.0);
    for (double x : g.value.data()) EXPECT_LE(std::abs(x), limit);
    auto &z = store.add("z", 1, 6, ad::Init::Zeros);
    for (double x : z.value.data()) EXPECT_EQ(x, 0.0);
    auto &c = store.add("c", 1, 1, ad::Init::Constant, 0.01);
    EXPECT_EQ(c.value(0, 0), 0.01);
    EXPECT_THROW(store.add("g", 1, 1), std::invalid_argument);
    EXPECT_EQ(store.num_scalars(), 60u + 6u + 1u);

    ad::ParamStore again(4);
    EXPECT_EQ(again.add("g", 10, 6).value, g.value);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    ad::ParamStore store(2);
    auto &w = store.add("w", 3, 3);
    const Matrix before = w.value;
    for (int i = 0; i < 5; ++i) ad::adam_step(store);
    EXPECT_EQ(w.value, before);
}

TEST(Adam, ConvergesOnScalarQuadratic) {
    ad::ParamStore store;
    auto &x = store.add("x", 1, 1, ad::Init::Zeros);
    ad::AdamOptions opt;
    opt.lr = 0.1;
    for (int step = 0; step < 500; ++step) {
        ad::Tape t;
        auto d = ad::add(t.param(x), t.constant(Matrix(1, 1, -3.0)));
        t.backward(ad::reduce_sum(ad::mul(d, d)));
        ad::adam_step(store, opt);
    }
    EXPECT_LT(std::abs(x.value(0, 0) - 3.0), 1e-2);
    for (double g : x.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, IdenticalSeedsGiveIdenticalTrajectories) {
    auto run = [] {
        ad::ParamStore store(99);
        auto &w = store.add("w", 4, 2);
        auto &b = store.add("b", 1, 2, ad::Init::Zeros);
        std::vector<double> losses;
        Rng rng(5);
        const Matrix input = random_matrix(6, 4, rng);
        for (int step = 0; step < 50; ++step) {
            ad::Tape t;
            auto y = ad::sigmoid(ad::add_bias(ad::matmul(t.constant(input), t.param(w)), t.param(b)));
            auto loss = ad::reduce_sum(ad::mul(y, y));
            losses.push_back(loss.item());
            t.backward(loss);
            ad::adam_step(store);
        }
        return losses;
    };
    EXPECT_EQ(run(), run());
}
