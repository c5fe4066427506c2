#include "doctest.h"

#include "cbs/batch_io.hpp"
#include "cbs/error.hpp"
#include "cbs/sampler.hpp"
#include "cbs/strategies.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace cbs;

namespace {

std::vector<SampleAnnotation> numbered(std::size_t n) {
    std::vector<SampleAnnotation> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::sample("s" + std::to_string(i), {static_cast<std::uint32_t>(i % 5)}));
    return out;
}

class FailingSink final : public BatchSink {
public:
    explicit FailingSink(std::size_t ok) : ok_(ok) {}
    void write(const SelectedBatch&) override {
        if (ok_ == 0) throw IoError("disk full");
        --ok_;
    }

private:
    std::size_t ok_;
};

}  // namespace

TEST_CASE("sub_batch_size") {
    CHECK(sub_batch_size(20480, 0.8) == 4096);
    CHECK(sub_batch_size(4, 0.5) == 2);
    CHECK(sub_batch_size(2, 0.5) == 1);
    CHECK(sub_batch_size(3, 0.5) == 2);  // 1.5 rounds up
    CHECK(sub_batch_size(7, 0.0) == 7);
    CHECK(sub_batch_size(1, 0.8) == 1);
}

TEST_CASE("SamplerConfig validation") {
    SamplerConfig c;
    CHECK_NOTHROW(c.validate());
    c.filter_ratio = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.filter_ratio = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.superbatch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("select_topk") {
    const std::vector<double> s{0.1, 0.9, 0.5};
    CHECK(select_topk(s, 2) == std::vector<std::size_t>{1, 2});
    const std::vector<double> flat(5, 1.0);
    CHECK(select_topk(flat, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(select_topk(s, 3) == std::vector<std::size_t>{1, 2, 0});
    CHECK(select_topk(s, 0).empty());
    CHECK_THROWS_AS(select_topk(s, 4), ConfigError);
    const std::vector<double> nan{0.1, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(select_topk(nan, 1), DataError);
}

TEST_CASE("select_topk agrees with a full sort") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        std::vector<double> s(n);
        // Few distinct values so ties are common.
        for (auto& x : s) x = static_cast<double>(rng() % 7) * 0.5;
        const std::size_t k = rng() % (n + 1);
        CHECK(select_topk(s, k) == oracle::sort_topk(s, k));
    }
}

TEST_CASE("run_sampler partitions the stream") {
    MemorySource src(numbered(10));
    SamplerConfig cfg;
    cfg.superbatch_size = 4;
    cfg.filter_ratio = 0.5;
    MemoryBatchSink sink;
    const auto summary = run_sampler(src, cfg, IidStrategy{}, sink);
    REQUIRE(sink.batches.size() == 3);
    CHECK(sink.batches[0].indices == std::vector<std::size_t>{0, 1});
    CHECK(sink.batches[1].indices == std::vector<std::size_t>{4, 5});
    CHECK(sink.batches[2].indices == std::vector<std::size_t>{8});
    CHECK(sink.batches[2].batch_seq == 2);
    CHECK(summary.superbatches == 3);
    CHECK(summary.samples_seen == 10);
    CHECK(summary.samples_selected == 5);
}

TEST_CASE("f = 0 selects everything, for every strategy") {
    for (const char* name : {"iid", "fm", "dm", "dm-alg2"}) {
        MemorySource src(numbered(9));
        SamplerConfig cfg;
        cfg.superbatch_size = 4;
        cfg.filter_ratio = 0.0;
        MemoryBatchSink sink;
        run_sampler(src, cfg, *make_strategy(name), sink);
        std::vector<std::size_t> seen;
        for (const auto& b : sink.batches) seen.insert(seen.end(), b.indices.begin(), b.indices.end());
        std::sort(seen.begin(), seen.end());
        CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    }
}

TEST_CASE("shuffle buffer is a seeded permutation") {
    const auto run = [](std::uint64_t seed, std::size_t epochs) {
        MemorySource src(numbered(50));
        SamplerConfig cfg;
        cfg.superbatch_size = 50;
        cfg.filter_ratio = 0.0;
        cfg.shuffle_buffer = 8;
        cfg.seed = seed;
        cfg.epochs = epochs;
        MemoryBatchSink sink;
        run_sampler(src, cfg, FmStrategy{}, sink);
        return sink.batches;
    };
    const auto a = run(1, 2);
    CHECK(a == run(1, 2));
    REQUIRE(a.size() == 2);
    CHECK(a[0].epoch == 0);
    CHECK(a[1].epoch == 1);
    auto sorted = a[0].indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK(a[0].indices != a[1].indices);
    CHECK(run(2, 1)[0].indices != a[0].indices);
}

TEST_CASE("prefetch does not change the output") {
    const auto run = [](bool prefetch) {
        MemorySource src(numbered(37));
        SamplerConfig cfg;
        cfg.superbatch_size = 8;
        cfg.filter_ratio = 0.6;
        cfg.prefetch = prefetch;
        cfg.epochs = 2;
        cfg.shuffle_buffer = 5;
        MemoryBatchSink sink;
        run_sampler(src, cfg, DmStrategy{}, sink);
        return sink.batches;
    };
    CHECK(run(true) == run(false));
}

TEST_CASE("run_sampler errors") {
    SamplerConfig cfg;
    cfg.superbatch_size = 4;
    cfg.filter_ratio = 0.5;
    SUBCASE("empty stream") {
        MemorySource src({});
        MemoryBatchSink sink;
        CHECK_THROWS_AS(run_sampler(src, cfg, IidStrategy{}, sink), DataError);
    }
    SUBCASE("sink failure reports partial progress") {
        MemorySource src(numbered(10));
        FailingSink sink(1);
        try {
            run_sampler(src, cfg, IidStrategy{}, sink);
            FAIL("expected SamplerAborted");
        } catch (const SamplerAborted& e) {
            CHECK(e.partial().superbatches == 1);
            CHECK(e.partial().samples_selected == 2);
        }
    }
}

TEST_CASE("batch wire format") {
    SelectedBatch b{0, 0, "dm", {3, 1, 2}};
    CHECK(format_batch_line(b) == "0\t0\tdm\t3,1,2");
    CHECK(parse_batch_line("0\t0\tdm\t3,1,2") == b);

    SelectedBatch big{7, 123, "dm-alg2", {18446744073709551615ull, 0}};
    CHECK(parse_batch_line(format_batch_line(big)) == big);

    for (const char* bad : {"0\t0\tdm", "0\t0\tdm\t3,,2", "0\t0\tdm\t3,1,", "x\t0\tdm\t1", "0\t0\t\t1",
                            "0\t0\tdm\t1\textra", "-1\t0\tdm\t1", "0\t0\tdm\t 1"})
        CHECK_THROWS_AS(parse_batch_line(bad), DataError);
}

TEST_CASE("header and stream sink") {
    const BatchHeader h{20480, 0.8, 42};
    CHECK(format_header(h) == "#cabs-batches v1 B=20480 f=0.8 seed=42");
    CHECK(parse_header(format_header(h)) == h);
    CHECK_THROWS_AS(parse_header("#cabs-batches v2 B=1 f=0 seed=0"), DataError);

    std::ostringstream out;
    {
        StreamBatchSink sink(out, h);
        emit_batch({0, 0, "iid", {0, 1}}, sink);
        emit_batch({0, 1, "iid", {4}}, sink);
        sink.end_epoch(0);
    }
    CHECK(out.str() == "#cabs-batches v1 B=20480 f=0.8 seed=42\n0\t0\tiid\t0,1\n0\t1\tiid\t4\n");

    std::istringstream in(out.str());
    const auto file = read_batch_file(in);
    CHECK(file.header == h);
    REQUIRE(file.batches.size() == 2);
    CHECK(file.batches[1].indices == std::vector<std::size_t>{4});

    std::istringstream bad("#cabs-batches v1 B=4 f=0.5 seed=0\n0\t0\tiid\t1\nbroken\n");
    try {
        read_batch_file(bad);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream headless("0\t0\tiid\t1\n");
    CHECK_THROWS_AS(read_batch_file(headless), DataError);
}
