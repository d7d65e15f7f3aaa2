#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hybridcast/csv.hpp"
#include "hybridcast/timeseries.hpp"

using namespace hybridcast;

namespace {

std::string csv_of(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string out = "timestamp,value\n";
    for (const auto& [t, v] : rows) out += t + "," + v + "\n";
    return out;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::argument;
}

}  // namespace

TEST(Csv, ParsesQuotedFieldsAndCrLf) {
    const auto rows = csv::parse("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n\r\n3,4\n");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][0], "x,1");
    EXPECT_EQ(rows[1][1], "say \"hi\"");
    EXPECT_EQ(rows[2][1], "4");
}

TEST(Csv, UnterminatedQuoteIsIngestError) {
    EXPECT_EQ(code_of([] { (void)csv::parse("a,b\n\"oops,1\n"); }), ErrorCode::ingest);
}

TEST(Timestamp, ParsesIsoAndEpoch) {
    EXPECT_EQ(parse_timestamp("1970-01-01T00:01:00Z"), 60);
    EXPECT_EQ(parse_timestamp("2020-01-01"), 1577836800);
    EXPECT_EQ(parse_timestamp("2020-01-01T02:00:00+02:00"), 1577836800);
    EXPECT_EQ(parse_timestamp("120"), 120);
    EXPECT_FALSE(parse_timestamp("2020-13-01").has_value());
    EXPECT_FALSE(parse_timestamp("yesterday").has_value());
    EXPECT_EQ(format_timestamp(1577836800), "2020-01-01T00:00:00Z");
}

TEST(Ingest, RegularGrid) {
    const auto s = ingest_csv(csv_of({{"0", "1"}, {"60", "2"}, {"120", "3"}}));
    EXPECT_EQ(s.frequency(), 60);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_EQ(s[2], 3.0);
}

TEST(Ingest, FillsOneGapWithMissing) {
    const auto s = ingest_csv(csv_of({{"0", "1"}, {"60", "2"}, {"180", "4"}}));
    EXPECT_EQ(s.frequency(), 60);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_TRUE(is_missing(s[2]));
    EXPECT_EQ(s[3], 4.0);
}

TEST(Ingest, SortsRowsAndReadsMissingMarkers) {
    const auto s = ingest_csv(csv_of({{"120", "NA"}, {"0", "1"}, {"60", ""}, {"180", "4"}}));
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_TRUE(is_missing(s[1]));
    EXPECT_TRUE(is_missing(s[2]));
}

TEST(Ingest, DuplicateTimestampNamesSecondOccurrence) {
    try {
        (void)ingest_csv(csv_of({{"0", "1"}, {"60", "2"}, {"60", "3"}, {"120", "4"}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ingest);
        EXPECT_EQ(e.index(), 3u);
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    }
}

TEST(Ingest, BadTimestampNamesRow) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (int i = 1; i <= 10; ++i) rows.emplace_back(i == 7 ? "not-a-time" : std::to_string(i * 60), "1");
    try {
        (void)ingest_csv(csv_of(rows));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ingest);
        EXPECT_EQ(e.index(), 7u);
        EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos);
    }
}

TEST(Ingest, TooShortAndIrregular) {
    EXPECT_EQ(code_of([] { (void)ingest_csv(csv_of({{"0", "1"}, {"60", "2"}})); }), ErrorCode::too_short);
    EXPECT_EQ(code_of([] { (void)ingest_csv(csv_of({{"0", "1"}, {"7", "2"}, {"20", "3"}, {"51", "4"}})); }),
              ErrorCode::irregular_series);
    EXPECT_EQ(code_of([] { (void)ingest_csv("time,value\n0,1\n1,2\n2,3\n"); }), ErrorCode::ingest);
    EXPECT_EQ(code_of([] { (void)ingest_csv(csv_of({{"0", "1"}, {"60", "x"}, {"120", "3"}})); }), ErrorCode::ingest);
}

TEST(Ingest, CustomColumns) {
    const auto s = ingest_csv("day,visits,other\n2024-01-01,10,a\n2024-01-02,12,b\n2024-01-03,11,c\n", "day", "visits");
    EXPECT_EQ(s.frequency(), 86400);
    EXPECT_EQ(s[1], 12.0);
}

TEST(Ingest, ExportThenReingestIsIdentity) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 100.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> v(50);
        for (auto& x : v) x = noise(rng);
        v[7] = missing_value();
        const TimeSeries s(1700000000 + trial * 3600, 3600, v);
        const auto once = ingest_csv(to_csv(s));
        EXPECT_EQ(once, s);
        EXPECT_EQ(to_csv(once), to_csv(s));
    }
}

TEST(Ingest, ModalFrequencyProperty) {
    // More than half of the gaps equal g; the rest are larger multiples of g.
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::int64_t g = 1 + static_cast<std::int64_t>(rng() % 5000);
        std::string text = "timestamp,value\n";
        Timestamp t = static_cast<Timestamp>(rng() % 100000);
        const int gaps = 20;
        int regular = 0;
        for (int i = 0; i <= gaps; ++i) {
            text += std::to_string(t) + "," + std::to_string(i) + "\n";
            const bool big = (i % 3 == 2);
            regular += big ? 0 : 1;
            t += big ? g * static_cast<std::int64_t>(2 + rng() % 3) : g;
        }
        ASSERT_GT(regular, gaps / 2);
        EXPECT_EQ(ingest_csv(text).frequency(), g);
    }
}

TEST(Split, ExactFractions) {
    const TimeSeries s(0, 1, std::vector<double>(10, 1.0));
    const auto parts = split_chronological(s, {0.6, 0.2});
    EXPECT_EQ(parts.train.size(), 6u);
    EXPECT_EQ(parts.validation.size(), 2u);
    EXPECT_EQ(parts.test.size(), 2u);
}

TEST(Split, FloorsFractions) {
    const TimeSeries s(0, 1, std::vector<double>(10, 1.0));
    const auto parts = split_chronological(s, {0.65, 0.2});
    // floor(6.5) = 6, floor(2.0) = 2, remainder 2.
    EXPECT_EQ(parts.train.size(), 6u);
    EXPECT_EQ(parts.validation.size(), 2u);
    EXPECT_EQ(parts.test.size(), 2u);
}

TEST(Split, EmptyValidationIsSplitError) {
    const TimeSeries s(0, 1, {1.0, 2.0, 3.0});
    EXPECT_EQ(code_of([&] { (void)split_chronological(s, {0.9, 0.09}); }), ErrorCode::split);
}

TEST(Split, RejectsMissingValues) {
    const TimeSeries s(0, 1, {1.0, missing_value(), 3.0, 4.0, 5.0});
    EXPECT_EQ(code_of([&] { (void)split_chronological(s, {0.4, 0.2}); }), ErrorCode::split);
}

TEST(Split, ConcatenationReproducesInput) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(40, 400);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(len(rng));
        for (auto& x : v) x = u(rng);
        const TimeSeries s(1000, 15, v);
        const double tf = 0.1 + 0.6 * (u(rng) + 1.0) / 2.0;
        const double vf = 0.05 + (0.85 - tf) * (u(rng) + 1.0) / 2.0;
        const auto parts = split_chronological(s, {tf, vf});
        const std::vector<TimeSeries> segs{parts.train, parts.validation, parts.test};
        EXPECT_EQ(concatenate(segs), s);
        EXPECT_LT(parts.train.last_timestamp(), parts.validation.start());
        EXPECT_LT(parts.validation.last_timestamp(), parts.test.start());
    }
}

TEST(Horizon, RejectsZero) { EXPECT_THROW(Horizon{0}, Error); }
