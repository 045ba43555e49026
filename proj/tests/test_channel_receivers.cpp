#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace cra;
using Catch::Matchers::WithinAbs;

TEST_CASE("channel model validation") {
    REQUIRE_THROWS_AS(ChannelModel::from_state_probs(2, {0.5, 0.5, 0.5, 0.5}),
                      ValidationError);
    REQUIRE_THROWS_AS(ChannelModel::from_state_probs(2, {1.0, 0.0}), ValidationError);
    REQUIRE_THROWS_AS(ChannelModel::two_receiver(0.8, 0.2, 0.2), ValidationError);

    const auto ch = ChannelModel::two_receiver(0.3, 0.35, 0.35);
    REQUIRE_THAT(ch.p00(), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(ch.p11(), WithinAbs(0.3, 1e-12));
    REQUIRE_THROWS_AS(ChannelModel::ideal_single().p11(), ValidationError);
}

TEST_CASE("reach probability") {
    const auto ch = ChannelModel::two_receiver(0.3, 0.35, 0.35);
    REQUIRE_THAT(ch.reach_probability({1}), WithinAbs(0.65, 1e-12));  // p11 + p10
    REQUIRE_THAT(ch.reach_probability({}), WithinAbs(0.0, 0.0));

    const auto uniform = ChannelModel::from_state_probs(2, {0.25, 0.25, 0.25, 0.25});
    REQUIRE_THAT(uniform.reach_probability({1, 2}), WithinAbs(0.75, 1e-12));  // 1 - p00

    REQUIRE_THROWS_AS(ch.reach_probability({3}), ValidationError);
    REQUIRE_THROWS_AS(ch.reach_probability({0}), ValidationError);
}

TEST_CASE("success at all receivers of a subset") {
    const auto ch = ChannelModel::two_receiver(0.3, 0.35, 0.35);
    REQUIRE_THAT(psuc_all(ch, 0.0, {1, 2}), WithinAbs(1.0, 0.0));
    REQUIRE_THAT(psuc_all(ch, 1.0, {}), WithinAbs(1.0, 0.0));
    REQUIRE_THROWS_AS(psuc_all(ch, -1.0, {1}), ValidationError);

    // P(A)=1 and rho=1: the probability that no interferer shows up at all.
    const auto always = ChannelModel::from_state_probs(1, {0.0, 1.0});
    const double analytic = psuc_all(always, 1.0, {1});
    REQUIRE_THAT(analytic, WithinAbs(std::exp(-1.0), 1e-15));
    std::mt19937_64 rng = make_stream_rng(99, 0);
    long long empty_slots = 0;
    const int slots = 1000000;
    for (int i = 0; i < slots; ++i) empty_slots += sample_poisson(rng, 1.0) == 0 ? 1 : 0;
    const double mc = static_cast<double>(empty_slots) / slots;
    const double sigma = std::sqrt(analytic * (1 - analytic) / slots);
    REQUIRE(std::abs(mc - analytic) < 3 * sigma);
}

TEST_CASE("success at any receiver of a subset") {
    const auto ch = ChannelModel::two_receiver(0.5, 0.25, 0.25);

    // Single receiver: both notions coincide.
    REQUIRE_THAT(psuc_any(ch, 1.3, {1}), WithinAbs(psuc_all(ch, 1.3, {1}), 1e-15));
    REQUIRE_THAT(psuc_any(ch, 0.0, {1, 2}), WithinAbs(1.0, 1e-15));

    const double expected = 2 * std::exp(-0.75) - std::exp(-1.0);
    REQUIRE_THAT(psuc_any(ch, 1.0, {1, 2}), WithinAbs(expected, 1e-12));
    REQUIRE_THAT(expected, WithinAbs(0.5768536643, 1e-9));
    REQUIRE_THAT(psuc_any(ch, 1.0, {1, 2}),
                 WithinAbs(testutil::psuc_any_enumeration(ch, 1.0, {1, 2}), 1e-9));
}

TEST_CASE("alternating-sum consistency against direct enumeration") {
    std::mt19937_64 rng = make_stream_rng(4242, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const int receivers = 1 + static_cast<int>(uniform_index(rng, 3));  // up to J=3
        const auto ch = testutil::random_channel(rng, receivers);
        const double rho = 4.0 * uniform_unit(rng);
        ReceiverSet subset;
        for (int r = 1; r <= receivers; ++r)
            if (uniform_unit(rng) < 0.6) subset.push_back(r);
        if (subset.empty()) subset.push_back(1);
        REQUIRE_THAT(psuc_any(ch, rho, subset),
                     WithinAbs(testutil::psuc_any_enumeration(ch, rho, subset), 1e-9));

        // Order within nonempty subsets: any >= all >= all-receivers.
        ReceiverSet everyone;
        for (int r = 1; r <= receivers; ++r) everyone.push_back(r);
        const double any = psuc_any(ch, rho, subset);
        const double all = psuc_all(ch, rho, subset);
        REQUIRE(any >= all - 1e-12);
        REQUIRE(all >= psuc_all(ch, rho, everyone) - 1e-12);
    }
}

TEST_CASE("collision-channel receiver") {
    const auto sa = make_collision_sa();
    REQUIRE_THAT(sa.success1(0.0), WithinAbs(1.0, 0.0));
    REQUIRE_THAT(sa.success1(1.0), WithinAbs(std::exp(-1.0), 1e-15));

    // Throughput peaks at unit load.
    const double peak = 1.0 * sa.success1(1.0);
    for (double rho = 0.1; rho <= 3.0; rho += 0.1)
        REQUIRE(rho * sa.success1(rho) <= peak + 1e-12);
}

TEST_CASE("bounded-multiplicity slot receiver") {
    REQUIRE_THROWS_AS(make_tfold(0), ValidationError);

    const auto fold1 = make_tfold(1);
    const auto sa = make_collision_sa();
    for (double rho = 0.0; rho <= 5.0; rho += 0.25)
        REQUIRE_THAT(fold1.success1(rho), WithinAbs(sa.success1(rho), 1e-15));

    const auto fold2 = make_tfold(2);
    REQUIRE_THAT(fold2.success1(0.0), WithinAbs(1.0, 0.0));
    REQUIRE_THAT(fold2.success1(1.0), WithinAbs(2.0 * std::exp(-1.0), 1e-15));

    // Monte Carlo cross-check: a tagged packet among Poisson(1) interferers
    // survives iff the total count stays within the fold.
    std::mt19937_64 rng = make_stream_rng(55, 0);
    const int trials = 1000000;
    long long ok = 0;
    for (int i = 0; i < trials; ++i) ok += sample_poisson(rng, 1.0) + 1 <= 2 ? 1 : 0;
    const double mc = static_cast<double>(ok) / trials;
    const double p = fold2.success1(1.0);
    REQUIRE(std::abs(mc - p) < 3 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("two-receiver closed forms") {
    REQUIRE_THROWS_AS(make_two_receiver(ChannelModel::ideal_single(), false), ValidationError);

    // p11=1 collapses to a single receiver, with or without cooperation.
    for (bool coop : {false, true}) {
        const auto rx = make_two_receiver(ChannelModel::two_receiver(1.0, 0.0, 0.0), coop);
        for (double rho = 0.0; rho <= 4.0; rho += 0.5)
            REQUIRE_THAT(rx.success1(rho), WithinAbs(std::exp(-rho), 1e-12));
    }

    // p11=0 splits the traffic over two independent receivers; cooperation
    // has nothing to cancel.
    const auto split_nc = make_two_receiver(ChannelModel::two_receiver(0.0, 0.5, 0.5), false);
    const auto split_c = make_two_receiver(ChannelModel::two_receiver(0.0, 0.5, 0.5), true);
    for (double rho = 0.0; rho <= 4.0; rho += 0.5) {
        REQUIRE_THAT(split_nc.success1(rho), WithinAbs(std::exp(-rho / 2.0), 1e-12));
        REQUIRE_THAT(split_c.success1(rho), WithinAbs(split_nc.success1(rho), 1e-15));
    }

    const auto ch = ChannelModel::two_receiver(0.5, 0.25, 0.25);
    const auto coop = make_two_receiver(ch, true);
    const double expected = 1.5 * std::exp(-0.75) - 0.25 * std::exp(-1.0);
    REQUIRE_THAT(coop.success1(1.0), WithinAbs(expected, 1e-12));
    REQUIRE_THAT(expected, WithinAbs(0.6165799688, 1e-9));

    // Monte Carlo cross-checks through the finite-system decoder.
    const auto noncoop = make_two_receiver(ch, false);
    auto [mc_nc, se_nc] = testutil::slot_mc(ch, 1.0, false, 400000, 11);
    REQUIRE(std::abs(mc_nc - noncoop.success1(1.0)) < 3 * se_nc);
    auto [mc_c, se_c] = testutil::slot_mc(ch, 1.0, true, 400000, 12);
    REQUIRE(std::abs(mc_c - coop.success1(1.0)) < 3 * se_c);

    // The averaged form over the tagged packet's own state agrees with the
    // non-cooperative closed form.
    for (double rho = 0.0; rho <= 3.0; rho += 0.5)
        REQUIRE_THAT(noncoop.success1(rho), WithinAbs(psuc_state_averaged(ch, rho), 1e-12));

    // Cooperation only ever helps.
    std::mt19937_64 rng = make_stream_rng(77, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rch = testutil::random_channel(rng, 2);
        const double rho = 5.0 * uniform_unit(rng);
        REQUIRE(make_two_receiver(rch, true).success1(rho) >=
                make_two_receiver(rch, false).success1(rho) - 1e-12);
    }
}

TEST_CASE("three-class two-receiver forms") {
    const auto noncoop = make_two_receiver_three_class(false);
    const auto coop = make_two_receiver_three_class(true);

    // Without shared-footprint traffic the receivers decouple.
    for (double r1 = 0.0; r1 <= 2.0; r1 += 0.5)
        for (double r2 = 0.0; r2 <= 2.0; r2 += 0.5) {
            const auto s = noncoop.success(OfferedLoad{r1, r2, 0.0});
            REQUIRE_THAT(s[0], WithinAbs(std::exp(-r1), 1e-12));
            REQUIRE_THAT(s[1], WithinAbs(std::exp(-r2), 1e-12));
        }
    REQUIRE(noncoop.success(OfferedLoad{0.0, 0.0, 0.0}) ==
            std::vector<double>{1.0, 1.0, 1.0});

    // Only shared-footprint traffic: its own class sees plain ALOHA.
    for (double r3 = 0.0; r3 <= 3.0; r3 += 0.5)
        REQUIRE_THAT(coop.success(OfferedLoad{0.0, 0.0, r3})[2],
                     WithinAbs(std::exp(-r3), 1e-12));

    // Cooperative success dominates non-cooperative for classes 1 and 2.
    std::mt19937_64 rng = make_stream_rng(78, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const OfferedLoad rho{3 * uniform_unit(rng), 3 * uniform_unit(rng),
                              3 * uniform_unit(rng)};
        const auto snc = noncoop.success(rho);
        const auto sc = coop.success(rho);
        for (int k = 0; k < 3; ++k) REQUIRE(sc[k] >= snc[k] - 1e-12);
    }
}

TEST_CASE("correlation coefficient of the symmetric channel family") {
    REQUIRE_THAT(correlation_coefficient(1.0), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(correlation_coefficient(0.0), WithinAbs(-1.0, 1e-15));
    REQUIRE_THAT(correlation_coefficient(1.0 / 3.0), WithinAbs(-0.5, 1e-12));
    REQUIRE_THROWS_AS(correlation_coefficient(1.5), ValidationError);
    REQUIRE_THROWS_AS(correlation_coefficient(-0.1), ValidationError);
}

TEST_CASE("closed-form receivers are monotone on the load grid") {
    REQUIRE(testutil::worst_monotonicity_violation(make_collision_sa(), 5.0, 0.1) <= 1e-12);
    REQUIRE(testutil::worst_monotonicity_violation(make_tfold(3), 5.0, 0.1) <= 1e-12);
    const auto ch = ChannelModel::two_receiver(0.3, 0.35, 0.35);
    REQUIRE(testutil::worst_monotonicity_violation(make_two_receiver(ch, false), 5.0, 0.1) <=
            1e-12);
    REQUIRE(testutil::worst_monotonicity_violation(make_two_receiver(ch, true), 5.0, 0.1) <=
            1e-12);
    REQUIRE(testutil::worst_monotonicity_violation(make_two_receiver_three_class(true), 5.0,
                                                   0.1) <= 1e-12);
    REQUIRE(testutil::worst_monotonicity_violation(make_two_receiver_three_class(false), 5.0,
                                                   0.1) <= 1e-12);
}
