#include <doctest.h>

#include <nlohmann/json.hpp>

#include "lifelog/errors.hpp"
#include "lifelog/qa.hpp"
#include "lifelog/synthlog.hpp"

using namespace lifelog;
using nlohmann::json;

namespace {

json valid_item(int i) {
    return json{{"qa_id", "qa-" + std::to_string(i)},
                {"participant", "p01"},
                {"question", "Where did the mug go?"},
                {"choices", {"shelf", "sink", "table", "bag"}},
                {"answer_index", 1},
                {"qa_type", "EntityLog"},
                {"asked_day", 2},
                {"asked_ms", 36'000'000},
                {"evidence", {{{"day", 1}, {"ms", 30'000'000}}}},
                {"certificate_ms", kMsPerDay + 6'000'000},
                {"needs_audio", false}};
}

QaItem base_item() {
    QaItem item;
    item.qa_id = "qa-x";
    item.participant = "p01";
    item.question = "Where did the mug go?";
    item.choices = {"shelf", "sink", "table", "bag"};
    item.answer_index = 1;
    item.qa_type = QaType::EventRecall;
    item.asked_at = Timestamp{2, 36'000'000};
    item.evidence_at = {Timestamp{1, 30'000'000}};
    item.certificate_ms = kMsPerDay + 6'000'000;
    return item;
}

}  // namespace

TEST_SUITE("qa") {
    TEST_CASE("a well-formed file loads completely") {
        json doc = json::array({valid_item(0), valid_item(1)});
        const QaLoadResult result = parse_qa(doc.dump());
        CHECK(result.items.size() == 2);
        CHECK(result.issues.empty());
        CHECK(result.items[0].qa_type == QaType::EntityLog);
        CHECK(result.items[0].certificate_ms == kMsPerDay + 6'000'000);
    }

    TEST_CASE("five of six items load; the bad one is reported with a pointer") {
        json doc = json::array();
        for (int i = 0; i < 5; ++i) doc.push_back(valid_item(i));
        json bad = valid_item(5);
        bad["answer_index"] = 7;
        doc.insert(doc.begin() + 2, bad);
        const QaLoadResult result = parse_qa(doc.dump());
        CHECK(result.items.size() == 5);
        REQUIRE(result.issues.size() == 1);
        CHECK(result.issues[0].pointer == "/2");
    }

    TEST_CASE("field-level schema errors carry a JSON pointer to the field") {
        json doc = json::array({valid_item(0)});
        doc[0].erase("choices");
        const QaLoadResult result = parse_qa(doc.dump());
        CHECK(result.items.empty());
        REQUIRE(result.issues.size() == 1);
        CHECK(result.issues[0].pointer == "/0/choices");
    }

    TEST_CASE("non-array input throws SchemaError") {
        CHECK_THROWS_AS(parse_qa("{}"), SchemaError);
        CHECK_THROWS_AS(parse_qa("not json at all"), SchemaError);
        CHECK_THROWS_AS(load_qa("/nonexistent/qa.json"), IoError);
    }

    TEST_CASE("the five-minute look-back rule is enforced") {
        // evidence 3 minutes before the question: loadable structure,
        // invariant violation
        json doc = json::array({valid_item(0)});
        doc[0]["evidence"] = json::array({json{{"day", 2}, {"ms", 36'000'000 - 3 * 60'000}}});
        doc[0]["certificate_ms"] = 3 * 60'000;
        const QaLoadResult result = parse_qa(doc.dump());
        CHECK(result.items.empty());
        REQUIRE(result.issues.size() == 1);
        CHECK(result.issues[0].message.find("lookback_too_short") != std::string::npos);
    }

    TEST_CASE("a thirty-hour certificate is retained and lands in the deep bucket") {
        json doc = json::array({valid_item(0)});
        doc[0]["asked_day"] = 3;
        doc[0]["asked_ms"] = 30'000'000;
        doc[0]["evidence"] = json::array({json{{"day", 2}, {"ms", 30'000'000 - 6 * 3'600'000}}});
        doc[0]["certificate_ms"] = 30LL * 3'600'000;
        const QaLoadResult result = parse_qa(doc.dump());
        REQUIRE(result.items.size() == 1);
        CHECK(bucketize(result.items[0].certificate_ms) == CertBucket::gt_24h);
        CHECK(to_string(bucketize(result.items[0].certificate_ms)) == ">24h");
    }

    TEST_CASE("filter_candidates drops by reason and reports counts") {
        std::vector<QaItem> items;
        items.push_back(base_item());  // kept

        QaItem late = base_item();  // 3-minute look-back
        late.qa_id = "late";
        late.evidence_at = {late.asked_at.plus_ms(-3 * 60'000)};
        late.certificate_ms = 3 * 60'000;
        items.push_back(late);

        QaItem wrong_cert = base_item();
        wrong_cert.qa_id = "wrong-cert";
        wrong_cert.certificate_ms += 1;
        items.push_back(wrong_cert);

        QaItem no_evidence = base_item();
        no_evidence.qa_id = "no-evidence";
        no_evidence.evidence_at.clear();
        items.push_back(no_evidence);

        QaItem future_evidence = base_item();
        future_evidence.qa_id = "future";
        future_evidence.evidence_at = {future_evidence.asked_at.plus_ms(60'000)};
        items.push_back(future_evidence);

        FilterReport report;
        const auto kept = filter_candidates(items, &report);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].qa_id == "qa-x");
        CHECK(report.kept == 1);
        CHECK(report.dropped_lookback == 1);
        CHECK(report.dropped_certificate == 1);
        CHECK(report.dropped_evidence == 2);
    }

    TEST_CASE("validate_qa_item rejects duplicated answer text") {
        QaItem dup = base_item();
        dup.choices = {"sink", "sink", "table", "bag"};
        dup.answer_index = 0;
        CHECK(validate_qa_item(dup) == QaDefect::schema);
        // duplicate distractors (not matching the answer) stay legal
        QaItem dup_distractors = base_item();
        dup_distractors.choices = {"shelf", "sink", "shelf", "bag"};
        dup_distractors.answer_index = 1;
        CHECK(validate_qa_item(dup_distractors) == QaDefect::none);
    }

    TEST_CASE("serialize/parse round-trip") {
        std::vector<QaItem> items{base_item()};
        items[0].qa_type = QaType::TaskMaster;
        items[0].needs_audio = true;
        const QaLoadResult result = parse_qa(serialize_qa(items));
        REQUIRE(result.items.size() == 1);
        CHECK(result.issues.empty());
        CHECK(result.items[0] == items[0]);
    }

    TEST_CASE("loader never yields an invariant-violating item under mutation") {
        // mutate every field of a valid item in turn; reload; every
        // surviving item must pass validate_qa_item
        const json base = valid_item(0);
        const std::vector<std::pair<std::string, json>> mutations = {
            {"qa_id", json("")},
            {"participant", json("")},
            {"question", json("")},
            {"choices", json::array({"a", "b"})},
            {"choices", json::array({"a", "b", "c", 7})},
            {"answer_index", json(-1)},
            {"answer_index", json(4)},
            {"qa_type", json("Mystery")},
            {"asked_day", json(0)},
            {"asked_ms", json(-5)},
            {"evidence", json::array()},
            {"evidence", json::array({json{{"day", 1}}})},
            {"certificate_ms", json(12345)},
            {"needs_audio", json("yes")},
        };
        for (const auto& [field, value] : mutations) {
            json doc = json::array({base});
            doc[0][field] = value;
            const QaLoadResult result = parse_qa(doc.dump());
            for (const QaItem& item : result.items) {
                CHECK(validate_qa_item(item) == QaDefect::none);
            }
            CHECK(result.items.size() + result.issues.size() == 1);
            CHECK(result.issues.size() == 1);  // every mutation above is fatal
        }
    }

    TEST_CASE("qa type names round-trip") {
        for (QaType t : kAllQaTypes) {
            CHECK(qa_type_from_string(to_string(t)) == t);
        }
        CHECK_THROWS_AS(qa_type_from_string("Unknown"), Error);
    }
}
