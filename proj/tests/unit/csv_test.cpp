#include <gtest/gtest.h>

#include <random>

#include "hydro/error.hpp"
#include "hydro/ingest.hpp"
#include "test_support.hpp"

using namespace hydro;
using namespace hydro::testing;

namespace {

std::string fatal_code(std::string_view doc) {
    try {
        parse_csv(doc);
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST(Csv, ParsesRowsAndMetadata) {
    const std::string doc =
        "\xEF\xBB\xBFtimestamp,parameter,value,unit,source,location_id,latitude,longitude,meta.lab\r\n"
        "2016-03-01T10:00:00Z,PH,7.1,pH-units,LAB,VNS,25.3,83.0,CWC\r\n"
        "\r\n"
        "2016-03-01T11:00:00Z,DO,\"6,5\",mg/L,sensor,VNS,,,\r\n"
        "2016-03-01T12:00:00Z,DO,6.4,mg/L,SENSOR,\"V\"\"NS\",,,\"multi\nline\"\n";
    auto batch = parse_csv(doc);
    ASSERT_EQ(batch.total(), 3u);
    ASSERT_EQ(batch.rows.size(), 2u);
    ASSERT_EQ(batch.errors.size(), 1u);
    EXPECT_EQ(batch.errors[0], (RowError{2, "BAD_VALUE", batch.errors[0].detail}));

    const auto& first = batch.rows[0];
    EXPECT_EQ(first.row, 1u);
    EXPECT_EQ(first.raw.parameter, "PH");
    EXPECT_EQ(first.raw.value, 7.1);
    EXPECT_EQ(first.raw.source, SourceMethod::Lab);
    EXPECT_EQ(first.raw.latitude, 25.3);
    EXPECT_EQ(first.raw.metadata, (std::vector<std::pair<std::string, std::string>>{{"lab", "CWC"}}));

    const auto& third = batch.rows[1];
    EXPECT_EQ(third.row, 3u);
    EXPECT_EQ(third.raw.location_id, "V\"NS");
    EXPECT_FALSE(third.raw.latitude);
    EXPECT_EQ(third.raw.metadata, (std::vector<std::pair<std::string, std::string>>{{"lab", "multi\nline"}}));
}

TEST(Csv, ColumnOrderIsFree) {
    auto batch = parse_csv("source,unit,value,parameter,timestamp,latitude,longitude\n"
                           "MOBILE_APP,mg/L,5,DO,2016-03-01T10:00:00Z,25.1,83.2\n");
    ASSERT_EQ(batch.rows.size(), 1u);
    EXPECT_EQ(batch.rows[0].raw.source, SourceMethod::MobileApp);
    EXPECT_FALSE(batch.rows[0].raw.location_id);
    EXPECT_EQ(batch.rows[0].raw.longitude, 83.2);
}

TEST(Csv, RowErrors) {
    auto batch = parse_csv(
        "timestamp,parameter,value,unit,source,location_id,latitude,longitude\n"
        "2016-03-01T10:00:00Z,PH,7,pH-units,LAB,VNS\n"
        "2016-03-01T10:00:00Z,PH,seven,pH-units,LAB,VNS,,\n"
        "2016-03-01T10:00:00Z,PH,7,pH-units,DRONE,VNS,,\n"
        "2016-03-01T10:00:00Z,PH,7,pH-units,LAB,VNS,north,83\n"
        "2016-03-01T10:00:00Z,PH,7,pH-units,LAB,VNS,,\n");
    ASSERT_EQ(batch.errors.size(), 4u);
    EXPECT_EQ(batch.errors[0].code, "BAD_ROW");
    EXPECT_EQ(batch.errors[1].code, "BAD_VALUE");
    EXPECT_EQ(batch.errors[2].code, "BAD_SOURCE");
    EXPECT_EQ(batch.errors[3].code, "BAD_COORDINATES");
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(batch.errors[i].row, i + 1);
    ASSERT_EQ(batch.rows.size(), 1u);
    EXPECT_EQ(batch.rows[0].row, 5u);
}

TEST(Csv, FatalHeaders) {
    EXPECT_EQ(fatal_code(""), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("\n\n"), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("timestamp,parameter,value,unit,location_id\nx,y,1,z,VNS\n"), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("timestamp,parameter,value,unit,source\n"), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("timestamp,parameter,value,unit,source,location_id,location_id\n"), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("timestamp,parameter,value,unit,source,\"location_id\n"), "FATAL_NO_HEADER");
    EXPECT_EQ(fatal_code("timestamp,parameter,value,unit,source,location_id\n"), "");
}

TEST(Csv, SerializeRoundTrip) {
    auto fixture = make_fixture(bundled_standards(), FixtureSpec{4, 3, 8});
    fixture[0].metadata["note"] = "has, comma and \"quotes\"";
    fixture[1].point->altitude = 71.25;
    const auto text = serialize_csv(fixture);
    EXPECT_EQ(text.rfind("timestamp,parameter,value,unit,source,location_id,latitude,longitude,altitude,meta.campaign,"
                         "meta.note,meta.station\n",
                         0),
              0u);

    auto parsed = parse_csv(text);
    ASSERT_TRUE(parsed.errors.empty());
    ASSERT_EQ(parsed.rows.size(), fixture.size());
    const auto& reg = bundled_standards().registry;
    for (std::size_t i = 0; i < fixture.size(); ++i) {
        auto v = validate_measurement(parsed.rows[i].raw, reg, Instant::from_seconds(2'000'000'000));
        ASSERT_TRUE(std::holds_alternative<Measurement>(v)) << i;
        EXPECT_EQ(std::get<Measurement>(v), fixture[i]) << i;
    }
}

TEST(Csv, HeaderOnlyForNothing) {
    EXPECT_EQ(serialize_csv({}), "timestamp,parameter,value,unit,source,location_id,latitude,longitude,altitude\n");
    EXPECT_EQ(parse_csv(serialize_csv({})).total(), 0u);
}

TEST(JsonBatch, AcceptsBothShapes) {
    const std::string item =
        R"({"timestamp":"2016-03-01T10:00:00Z","parameter":"DO","value":6,"unit":"mg/L","source":"LAB","location_id":"VNS","metadata":{"k":"v"}})";
    auto a = parse_json_batch("[" + item + "]");
    auto b = parse_json_batch(R"({"measurements":[)" + item + "]}");
    ASSERT_EQ(a.rows.size(), 1u);
    ASSERT_EQ(b.rows.size(), 1u);
    EXPECT_EQ(a.rows[0].raw.metadata, b.rows[0].raw.metadata);

    auto bad = parse_json_batch(R"([1, {"timestamp":"x","parameter":"DO","value":"6","unit":"mg/L","source":"LAB"}])");
    ASSERT_EQ(bad.errors.size(), 2u);
    EXPECT_EQ(bad.errors[0].code, "BAD_ROW");
    EXPECT_EQ(bad.errors[1].code, "BAD_VALUE");

    for (const char* body : {"", "{", "{\"rows\":[]}", "42", "{\"measurements\":{}}"}) {
        try {
            parse_json_batch(body);
            ADD_FAILURE() << body;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "BAD_REQUEST");
        }
    }
}
