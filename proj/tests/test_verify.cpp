#include <gtest/gtest.h>

#include "fgsr/verify.hpp"

TEST(Verify, DefaultSuitePasses) {
    const auto out = fgsr::run_verification({});
    EXPECT_EQ(out.size(), 7u);
    for (const auto& p : out) {
        EXPECT_TRUE(p.passed) << p.name << ": " << p.detail;
        EXPECT_GT(p.checks, 0u) << p.name;
    }
}

TEST(Verify, PerturbationIsCaught) {
    fgsr::VerifyOptions opts;
    opts.perturb = true;
    const auto out = fgsr::run_verification(opts);
    std::size_t failed = 0;
    for (const auto& p : out)
        if (p.name.rfind("identity", 0) == 0) {
            EXPECT_FALSE(p.passed) << p.name;
            ++failed;
        }
    EXPECT_EQ(failed, 3u);
}

TEST(Verify, SingleExponent) {
    fgsr::VerifyOptions opts;
    opts.q = fgsr::GroupExponent::from_value(0.25);
    for (const auto& p : fgsr::run_verification(opts)) EXPECT_TRUE(p.passed) << p.name;
}
