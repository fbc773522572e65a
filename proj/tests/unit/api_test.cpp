#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "hydro/api.hpp"
#include "hydro/codec.hpp"
#include "test_support.hpp"

using namespace hydro;
using namespace hydro::testing;
using nlohmann::json;

namespace {

const Instant kNow = *parse_rfc3339("2016-06-01T00:00:00Z");

class ApiTest : public ::testing::Test {
protected:
    ApiTest()
        : store_(dir_.path(), fast_store()),
          standards_(std::make_shared<const Standards>(bundled_standards())),
          api_(store_, standards_, ApiConfig{"s3cret", 500}, [] { return kNow; }) {}

    ApiResponse get(std::string path, std::map<std::string, std::string> query = {}) const {
        ApiRequest r;
        r.path = std::move(path);
        r.query = std::move(query);
        return api_.handle(r);
    }

    ApiResponse post(std::string path, std::string body, std::string auth = "Bearer s3cret") const {
        ApiRequest r;
        r.method = "POST";
        r.path = std::move(path);
        r.body = std::move(body);
        if (!auth.empty()) r.headers["authorization"] = auth;
        return api_.handle(r);
    }

    static json body(const ApiResponse& r) { return json::parse(r.body); }

    void seed() {
        const auto r = post("/v1/upload",
                            "timestamp,parameter,value,unit,source,location_id,latitude,longitude\n"
                            "2016-03-01T10:00:00Z,DO,5.0,mg/L,LAB,VNS,25.3176,83.0105\n"
                            "2016-03-01T10:00:00Z,PH,7.2,pH-units,SENSOR,VNS,,\n"
                            "2016-03-01T11:00:00Z,FC,120,MPN/100mL,LAB,VNS,,\n"
                            "2016-03-01T11:00:00Z,CHROMIUM,30,µg/L,LAB,VNS,,\n"
                            "2016-03-02T10:00:00Z,DO,6.5,mg/L,SENSOR,KNP,26.45,80.33\n");
        ASSERT_EQ(r.status, 200) << r.body;
    }

    TempDir dir_;
    Store store_;
    StandardsHandle standards_;
    ApiService api_;
};

void expect_error(const ApiResponse& r, int status, const std::string& code) {
    EXPECT_EQ(r.status, status) << r.body;
    auto j = json::parse(r.body);
    EXPECT_EQ(j["status"], status);
    EXPECT_EQ(j["code"], code);
    EXPECT_TRUE(j["message"].is_string());
}

}  // namespace

TEST(StatusFor, Mapping) {
    EXPECT_EQ(status_for("UNKNOWN_LOCATION"), 404);
    EXPECT_EQ(status_for("NOT_FOUND"), 404);
    EXPECT_EQ(status_for("UNAUTHORIZED"), 401);
    EXPECT_EQ(status_for("CONFLICT"), 409);
    EXPECT_EQ(status_for("STORAGE_IO"), 500);
    EXPECT_EQ(status_for("UNKNOWN_PURPOSE"), 400);
    EXPECT_EQ(status_for("BAD_BBOX"), 400);
}

TEST_F(ApiTest, Health) {
    auto r = get("/healthz");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body(r)["status"], "ok");
    EXPECT_EQ(body(r)["config_version"], "2026.10-1");
}

TEST_F(ApiTest, UploadThenAssess) {
    seed();
    auto r = get("/v1/locations/VNS/assessment", {{"purpose", "DRINKING"}});
    ASSERT_EQ(r.status, 200) << r.body;
    auto j = body(r);
    EXPECT_EQ(j["location_id"], "VNS");
    EXPECT_EQ(j["purpose"], "DRINKING");
    EXPECT_EQ(j["as_of"], "2016-03-01T11:00:00Z");
    const auto& e = j["entries"];
    ASSERT_EQ(e.size(), bundled_standards().registry.size());
    EXPECT_EQ(e[0]["parameter"], "DO");
    EXPECT_EQ(e[0]["status"], "UNSAFE_LOW");
    EXPECT_EQ(e[0]["source"], "LAB");
    EXPECT_EQ(e[1]["status"], "SAFE");
    EXPECT_EQ(e[2]["status"], "UNSAFE_HIGH");
    EXPECT_EQ(e[3]["status"], "SAFE");
    EXPECT_DOUBLE_EQ(e[3]["latest_value"].get<double>(), 0.03);
    EXPECT_EQ(e[3]["range"]["contributing_authorities"], json::array({"BIS", "CPCB"}));
    EXPECT_EQ(e[4]["status"], "NOT_APPLICABLE");
    EXPECT_TRUE(e[4]["range"].is_null());

    // Default purpose is the first configured one.
    EXPECT_EQ(get("/v1/locations/VNS/assessment").body, r.body);
}

TEST_F(ApiTest, AssessmentErrors) {
    seed();
    expect_error(get("/v1/locations/NOPE/assessment"), 404, "UNKNOWN_LOCATION");
    auto r = get("/v1/locations/VNS/assessment", {{"purpose", "SWIMMING_POOL"}});
    expect_error(r, 400, "UNKNOWN_PURPOSE");
    EXPECT_NE(body(r)["message"].get<std::string>().find("DRINKING"), std::string::npos);
}

TEST_F(ApiTest, UploadNeedsToken) {
    const std::string csv = "timestamp,parameter,value,unit,source,location_id,latitude,longitude\n"
                            "2016-03-01T10:00:00Z,DO,5.0,mg/L,LAB,VNS,25.3,83.0\n";
    expect_error(post("/v1/upload", csv, ""), 401, "UNAUTHORIZED");
    expect_error(post("/v1/upload", csv, "Bearer wrong"), 401, "UNAUTHORIZED");
    expect_error(post("/v1/upload", csv, "Bearer s3cret2"), 401, "UNAUTHORIZED");
    expect_error(post("/v1/upload", csv, "Basic s3cret"), 401, "UNAUTHORIZED");
    EXPECT_EQ(store_.size(), 0u);
    EXPECT_EQ(post("/v1/upload", csv).status, 200);
    EXPECT_EQ(store_.size(), 1u);
}

TEST_F(ApiTest, UploadReportsRowErrors) {
    auto r = post("/v1/upload",
                  "timestamp,parameter,value,unit,source,location_id,latitude,longitude\n"
                  "2016-03-01T10:00:00Z,DO,5.0,mg/L,LAB,VNS,95,83.0\n"
                  "2016-03-01T10:00:00Z,DO,5.0,mg/L,LAB,VNS,25,83.0\n");
    ASSERT_EQ(r.status, 200);
    auto j = body(r);
    EXPECT_EQ(j["accepted"], 1);
    EXPECT_EQ(j["rejected"], 1);
    EXPECT_EQ(j["rejections"][0]["row"], 1);
    EXPECT_EQ(j["rejections"][0]["code"], "BAD_COORDINATES");

    expect_error(post("/v1/upload", "nonsense without columns\n"), 400, "FATAL_NO_HEADER");
    expect_error(post("/v1/measurements", "{}"), 400, "BAD_REQUEST");
}

TEST_F(ApiTest, JsonMeasurements) {
    auto r = post("/v1/measurements",
                  R"({"measurements":[{"timestamp":"2016-03-01T10:00:00+05:30","parameter":"ph","value":7.9,
                      "unit":"pH-units","source":"MOBILE_APP","latitude":25.3,"longitude":83.0,
                      "metadata":{"device":"phone-7"}}]})");
    ASSERT_EQ(r.status, 200) << r.body;
    auto j = body(r);
    ASSERT_EQ(j["new_locations"].size(), 1u);
    const std::string id = j["new_locations"][0];
    auto latest = body(get("/v1/locations/" + id + "/latest"));
    EXPECT_EQ(latest["PH"]["timestamp"], "2016-03-01T04:30:00Z");
    EXPECT_EQ(latest["PH"]["source"], "MOBILE_APP");
}

TEST_F(ApiTest, LocationsAndBbox) {
    seed();
    auto all = body(get("/v1/locations"));
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0]["id"], "KNP");
    EXPECT_EQ(all[1]["parameter_count"], 4);

    auto some = body(get("/v1/locations", {{"bbox", "25,82,26,84"}}));
    ASSERT_EQ(some.size(), 1u);
    EXPECT_EQ(some[0]["id"], "VNS");

    for (const char* bad : {"1,2,3", "a,b,c,d", "26,82,25,84", "0,0,0,200", "1,2,3,4,5"})
        expect_error(get("/v1/locations", {{"bbox", bad}}), 400, "BAD_BBOX");
}

TEST_F(ApiTest, PurposesParametersStandards) {
    auto purposes = body(get("/v1/purposes"));
    ASSERT_GE(purposes.size(), 4u);
    EXPECT_EQ(purposes[0]["id"], "DRINKING");
    EXPECT_EQ(purposes[0]["default"], true);
    EXPECT_EQ(purposes[1]["default"], false);

    auto params = body(get("/v1/parameters"));
    EXPECT_EQ(params.size(), bundled_standards().registry.size());

    auto drinking = body(get("/v1/standards", {{"purpose", "DRINKING"}}));
    ASSERT_EQ(drinking.size(), 4u);
    EXPECT_EQ(drinking[1]["parameter"], "PH");
    EXPECT_EQ(drinking[1]["min"], 6.5);
    EXPECT_TRUE(drinking[0]["max"].is_null());

    auto all = body(get("/v1/standards"));
    EXPECT_GT(all.size(), drinking.size());
    expect_error(get("/v1/standards", {{"purpose", "NOPE"}}), 400, "UNKNOWN_PURPOSE");
}

TEST_F(ApiTest, Series) {
    std::vector<Measurement> batch;
    for (int i = 0; i < 6; ++i) batch.push_back(reading("VNS", "DO", i * 10, i + 1.0));
    store_.put_batch(batch);
    auto r = get("/v1/locations/VNS/series", {{"parameter", "DO"},
                                              {"from", "1970-01-01T00:00:00Z"},
                                              {"to", "1970-01-01T00:01:00Z"},
                                              {"max_points", "2"}});
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(body(r), json::parse(R"([{"t":"1970-01-01T00:00:15Z","value":2.0,"count":3},
                                        {"t":"1970-01-01T00:00:45Z","value":5.0,"count":3}])"));

    auto raw = body(get("/v1/locations/VNS/series", {{"parameter", "DO"}}));
    EXPECT_EQ(raw.size(), 6u);

    expect_error(get("/v1/locations/VNS/series"), 400, "BAD_REQUEST");
    expect_error(get("/v1/locations/VNS/series", {{"parameter", "DO"}, {"max_points", "0"}}), 400, "BAD_RANGE");
    expect_error(get("/v1/locations/VNS/series", {{"parameter", "DO"}, {"max_points", "2.5"}}), 400, "BAD_RANGE");
    expect_error(get("/v1/locations/VNS/series", {{"parameter", "DO"}, {"from", "yesterday"}}), 400, "BAD_TIMESTAMP");
    expect_error(get("/v1/locations/VNS/series",
                     {{"parameter", "DO"}, {"from", "1970-01-01T00:01:00Z"}, {"to", "1970-01-01T00:00:00Z"}}),
                 400, "BAD_RANGE");
    expect_error(get("/v1/locations/NOPE/series", {{"parameter", "DO"}}), 404, "UNKNOWN_LOCATION");
}

TEST_F(ApiTest, Correlation) {
    const double xs[] = {1, 2, 3, 4}, ys[] = {1, 3, 2, 4};
    std::vector<Measurement> batch;
    for (int i = 0; i < 4; ++i) {
        batch.push_back(reading("VNS", "DO", i * 86400, xs[i], SourceMethod::Lab));
        batch.push_back(reading("VNS", "DO", i * 86400 + 900, ys[i], SourceMethod::Sensor));
    }
    store_.put_batch(batch);
    auto j = body(get("/v1/locations/VNS/correlation", {{"parameter", "DO"}}));
    EXPECT_EQ(j["n_pairs"], 4);
    EXPECT_NEAR(j["r"].get<double>(), 0.8, 1e-12);
    EXPECT_TRUE(j["reason"].is_null());
    EXPECT_EQ(j["source_a"], "LAB");
    EXPECT_EQ(j["tolerance_s"], 3600.0);

    auto none = body(get("/v1/locations/VNS/correlation", {{"parameter", "DO"}, {"tolerance_s", "60"}}));
    EXPECT_EQ(none["reason"], "INSUFFICIENT_PAIRS");
    EXPECT_TRUE(none["r"].is_null());

    expect_error(get("/v1/locations/VNS/correlation", {{"parameter", "DO"}, {"source_b", "LAB"}}), 400, "SAME_SOURCE");
    expect_error(get("/v1/locations/VNS/correlation", {{"parameter", "DO"}, {"source_b", "DRONE"}}), 400, "BAD_SOURCE");
}

TEST_F(ApiTest, RoutingAndCors) {
    expect_error(get("/v2/nothing"), 404, "NOT_FOUND");
    expect_error(get("/v1/locations/VNS/assessment/extra"), 404, "NOT_FOUND");
    ApiRequest options;
    options.method = "OPTIONS";
    options.path = "/v1/locations";
    auto r = api_.handle(options);
    EXPECT_EQ(r.status, 204);
    bool cors = false;
    for (const auto& [k, v] : r.headers) cors |= k == "Access-Control-Allow-Origin" && v == "*";
    EXPECT_TRUE(cors);
}

TEST_F(ApiTest, EmptyTokenDisablesUploads) {
    ApiService locked(store_, standards_, ApiConfig{"", 500});
    ApiRequest r;
    r.method = "POST";
    r.path = "/v1/upload";
    r.headers["authorization"] = "Bearer ";
    r.body = "timestamp,parameter,value,unit,source,location_id\n";
    EXPECT_EQ(locked.handle(r).status, 401);
}

TEST_F(ApiTest, ReloadSwapsStandards) {
    seed();
    auto before = body(get("/v1/locations/VNS/assessment"));
    auto alt = std::make_shared<Standards>(bundled_standards());
    std::rotate(alt->purposes.begin(), alt->purposes.begin() + 1, alt->purposes.end());
    alt->version = "alt";
    standards_.reload(alt);
    auto after = body(get("/v1/locations/VNS/assessment"));
    EXPECT_NE(before["purpose"], after["purpose"]);
    EXPECT_EQ(body(get("/healthz"))["config_version"], "alt");
}
