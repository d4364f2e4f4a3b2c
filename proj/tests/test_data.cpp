// Tests for the homodyne data generator: schedules, determinism, sampling
// statistics (against both the Gaussian closed form and the Fock-basis pdf),
// and the .qds container format.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qst/dataset.hpp"
#include "qst/fock.hpp"
#include "stat_oracles.hpp"

using namespace qst;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / (std::string("qst_test_") + name);
}

std::vector<uint8_t> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(Mix64, AvalancheSanity) {
    // neighbouring inputs land far apart and the mixer is stable
    EXPECT_NE(rng::mix64(0, 0), rng::mix64(0, 1));
    EXPECT_NE(rng::mix64(0, 0), rng::mix64(1, 0));
    int diff_bits = 0;
    const uint64_t a = rng::mix64(42, 7), b = rng::mix64(42, 8);
    for (int i = 0; i < 64; ++i) diff_bits += ((a >> i) & 1) != ((b >> i) & 1);
    EXPECT_GT(diff_bits, 16);
    EXPECT_LT(diff_bits, 48);
}

TEST(PhaseSchedule, LinearSweep) {
    const auto p4 = phase_schedule(0, 4);
    ASSERT_EQ(p4.size(), 4u);
    EXPECT_DOUBLE_EQ(p4[0], 0.0);
    EXPECT_DOUBLE_EQ(p4[1], kPi / 4);
    EXPECT_DOUBLE_EQ(p4[2], kPi / 2);
    EXPECT_DOUBLE_EQ(p4[3], 3 * kPi / 4);

    const auto p = phase_schedule(0, 2048);
    EXPECT_DOUBLE_EQ(p.front(), 0.0);
    EXPECT_DOUBLE_EQ(p.back(), kPi * 2047 / 2048);
}

TEST(PhaseSchedule, RandomScheduleReproducible) {
    const auto a = phase_schedule(1, 2048, 123);
    const auto b = phase_schedule(1, 2048, 123);
    EXPECT_EQ(a, b);
    const auto c = phase_schedule(1, 2048, 124);
    EXPECT_NE(a, c);
    for (double v : a) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, kPi);
    }
    EXPECT_THROW(phase_schedule(7, 16), Error);
}

TEST(SampleSequence, VacuumVariance) {
    GenConfig cfg;
    cfg.seq_len = 1'000'000;
    const auto seq = sample_sequence(StateParams::make(0, 0, 0), cfg, rng::mix64(1, 0));
    double sum = 0.0, sum2 = 0.0;
    for (float v : seq.values) {
        sum += v;
        sum2 += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(seq.values.size());
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_NEAR(var, 0.5, 0.005);                          // 1%
    EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(0.5 / n));      // zero-mean, 3 sigma
}

TEST(SampleSequence, PooledVarianceNearSqueezedAxis) {
    // 10 dB pure state, theta = 0: points with phi ~ 0 have variance ~ 0.05
    const StateParams p = params_from_db({10, 10}, 0.0);
    GenConfig cfg; // seq_len 2048, schedule 0
    double sum2 = 0.0;
    int count = 0;
    for (uint64_t ex = 0; ex < 1000; ++ex) {
        const auto seq = sample_sequence(p, cfg, rng::mix64(2, ex));
        for (int k = 0; k < 15; ++k) {
            sum2 += static_cast<double>(seq.values[k]) * seq.values[k];
            ++count;
        }
    }
    EXPECT_NEAR(sum2 / count, 0.05, 0.0025); // 5%
}

TEST(SampleSequence, Deterministic) {
    GenConfig cfg;
    cfg.seq_len = 512;
    const StateParams p = params_from_db({4, 5}, 1.0);
    const auto a = sample_sequence(p, cfg, 777);
    const auto b = sample_sequence(p, cfg, 777);
    EXPECT_EQ(a.values, b.values);
    const auto c = sample_sequence(p, cfg, 778);
    EXPECT_NE(a.values, c.values);
}

TEST(DrawQuadrature, RedrawOnClamp) {
    // With an artificially tiny clamp the redraw loop must still terminate
    // and respect the bound; with the real clamp the value is identical to
    // the first draw.
    const StateParams p = params_from_db({0, 0}, 0.0);
    for (uint64_t k = 0; k < 200; ++k) {
        const double tight = draw_quadrature(p, 0.0, 99, k, 0.1);
        EXPECT_LE(std::abs(tight), 0.1);
    }
}

TEST(GenerateDataset, EmptyAndDeterminism) {
    GenConfig cfg;
    cfg.n_examples = 0;
    EXPECT_TRUE(generate_dataset(cfg).examples.empty());

    cfg.n_examples = 3;
    cfg.seq_len = 256;
    cfg.global_seed = 99;
    const auto p1 = temp_file("det1.qds"), p2 = temp_file("det2.qds");
    write_dataset(generate_dataset(cfg), p1.string());
    write_dataset(generate_dataset(cfg), p2.string());
    EXPECT_EQ(slurp(p1), slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST(GenerateDataset, LabelHistogramUniform) {
    GenConfig cfg;
    cfg.n_examples = 20'000;
    cfg.global_seed = 5;
    const int bins = 10;
    std::vector<double> counts(bins, 0.0), expected(bins, cfg.n_examples / double(bins));
    for (uint32_t i = 0; i < cfg.n_examples; ++i) {
        const double s = db_from_params(label_for_example(cfg, i)).squeezing_db;
        const int b = std::min(bins - 1, static_cast<int>(s));
        ASSERT_GE(s, 0.0);
        ASSERT_LE(s, 10.0);
        counts[b] += 1.0;
    }
    EXPECT_GT(testutil::chi2_test(counts, expected), 0.01);
}

TEST(GenerateDataset, LabelsWithinRanges) {
    GenConfig cfg;
    cfg.global_seed = 21;
    for (uint64_t i = 0; i < 500; ++i) {
        const StateParams p = label_for_example(cfg, i);
        const DbLevels d = db_from_params(p);
        EXPECT_GE(d.squeezing_db, -1e-9);
        EXPECT_LE(d.squeezing_db, 10.0 + 1e-9);
        EXPECT_GE(d.antisqueezing_db - d.squeezing_db, -1e-9);
        EXPECT_LE(d.antisqueezing_db - d.squeezing_db, 3.0 + 1e-9);
        EXPECT_GE(p.theta, 0.0);
        EXPECT_LT(p.theta, kPi);
    }
}

TEST(DatasetIo, RoundTripBitExact) {
    GenConfig cfg;
    cfg.n_examples = 3;
    cfg.seq_len = 128;
    cfg.global_seed = 1234;
    cfg.schedule_id = 1;
    const Dataset ds = generate_dataset(cfg);
    const auto p1 = temp_file("rt1.qds"), p2 = temp_file("rt2.qds");
    write_dataset(ds, p1.string());
    const Dataset back = read_dataset(p1.string());
    EXPECT_EQ(back.seq_len, ds.seq_len);
    EXPECT_EQ(back.schedule_id, ds.schedule_id);
    ASSERT_EQ(back.examples.size(), ds.examples.size());
    for (size_t i = 0; i < ds.examples.size(); ++i) {
        EXPECT_EQ(back.examples[i].sequence.values, ds.examples[i].sequence.values);
        EXPECT_DOUBLE_EQ(back.examples[i].params.r, ds.examples[i].params.r);
        EXPECT_DOUBLE_EQ(back.examples[i].params.theta, ds.examples[i].params.theta);
        EXPECT_DOUBLE_EQ(back.examples[i].params.nbar, ds.examples[i].params.nbar);
    }
    write_dataset(back, p2.string());
    EXPECT_EQ(slurp(p1), slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST(DatasetIo, StructuredErrors) {
    GenConfig cfg;
    cfg.n_examples = 2;
    cfg.seq_len = 64;
    const auto path = temp_file("err.qds");
    write_dataset(generate_dataset(cfg), path.string());

    auto bytes = slurp(path);
    // bad magic
    auto corrupt = bytes;
    corrupt[0] = 'X';
    std::ofstream(path, std::ios::binary)
        .write(reinterpret_cast<const char*>(corrupt.data()), corrupt.size());
    try {
        read_dataset(path.string());
        FAIL() << "expected bad-magic error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
    }

    // unsupported version
    corrupt = bytes;
    corrupt[4] = 99;
    std::ofstream(path, std::ios::binary)
        .write(reinterpret_cast<const char*>(corrupt.data()), corrupt.size());
    try {
        read_dataset(path.string());
        FAIL() << "expected version error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
    }

    // truncated
    corrupt = bytes;
    corrupt.resize(bytes.size() - 17);
    std::ofstream(path, std::ios::binary)
        .write(reinterpret_cast<const char*>(corrupt.data()), corrupt.size());
    try {
        read_dataset(path.string());
        FAIL() << "expected truncation error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
    fs::remove(path);
}

TEST(SamplerStatistics, FixedPhiVarianceWithin3Sigma) {
    const StateParams p = params_from_db({3, 5}, 0.3);
    const double phi = 0.8;
    const double target = quadrature_variance(p, phi);
    const int n = 100'000;
    double sum2 = 0.0;
    const uint64_t stream = rng::mix64(31, 0);
    for (int k = 0; k < n; ++k) {
        const double x = draw_quadrature(p, phi, stream, static_cast<uint64_t>(k));
        sum2 += x * x;
    }
    const double est = sum2 / n;
    const double sigma = target * std::sqrt(2.0 / n); // var of the variance estimator
    EXPECT_NEAR(est, target, 3.0 * sigma);
}

TEST(SamplerStatistics, KsAgainstFockPdf) {
    const StateParams p = params_from_db({3, 5}, 0.3);
    const double phi = 0.8;
    const auto rho = fock::density_from_params(p, 128);
    testutil::NumericCdf cdf([&](double x) { return fock::quadrature_pdf_fock(rho, phi, x); },
                             -10.0, 10.0, 4000);
    std::vector<double> samples(10'000);
    const uint64_t stream = rng::mix64(32, 0);
    for (size_t k = 0; k < samples.size(); ++k)
        samples[k] = draw_quadrature(p, phi, stream, k);
    EXPECT_GT(testutil::ks_test(std::move(samples), cdf), 0.01);
}
