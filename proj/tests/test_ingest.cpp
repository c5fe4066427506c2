#include "doctest.h"

#include "cbs/annotation.hpp"
#include "cbs/error.hpp"
#include "scratch.hpp"

#include <sstream>

using namespace cbs;

namespace {

ConceptVocabulary vocab8() {
    std::vector<VocabularyEntry> e;
    for (const char* n : {"man", "woman", "tree", "car", "ball", "sky", "grass", "dog"}) e.push_back({n, 1});
    return ConceptVocabulary(std::move(e));
}

}  // namespace

TEST_CASE("parse_annotation_line") {
    const auto v = vocab8();
    std::vector<IngestIssue> issues;

    const auto s = parse_annotation_line(
        R"({"id":"a","concepts":[{"name":"dog","score":0.9,"box":[0.1,0.1,0.5,0.5]},{"name":"Dog","score":0.5}],"caption":"a dog"})",
        v, 1, issues);
    REQUIRE(s);
    CHECK(issues.empty());
    CHECK(s->sample_id == "a");
    REQUIRE(s->concepts.size() == 2);
    CHECK(s->concepts[0].concept_id == ConceptId{7});
    CHECK(s->concepts[0].box.has_value());
    CHECK_FALSE(s->concepts[1].box.has_value());
    CHECK(s->concept_set().size() == 1);
    CHECK(*s->caption == "a dog");
    CHECK_FALSE(s->recaption);

    SUBCASE("unknown concept is skipped and reported") {
        const auto u = parse_annotation_line(R"({"id":"b","concepts":[{"name":"unicorn","score":1},{"name":"sky","score":1}]})",
                                             v, 4, issues);
        REQUIRE(u);
        CHECK(u->concepts.size() == 1);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].kind == IngestIssue::Kind::unknown_concept);
        CHECK(issues[0].line == 4);
    }
    SUBCASE("malformed") {
        for (const char* bad : {R"({"id":"c","concepts":[{"name":"dog")", R"([1,2])", R"({"concepts":[]})",
                                R"({"id":"c","concepts":[{"name":"dog","score":2}]})",
                                R"({"id":"c","concepts":[{"name":"dog","score":1,"box":[0.5,0,0.1,1]}]})"}) {
            issues.clear();
            CHECK_FALSE(parse_annotation_line(bad, v, 2, issues));
            REQUIRE(issues.size() == 1);
            CHECK(issues[0].kind == IngestIssue::Kind::malformed);
        }
    }
}

TEST_CASE("serialize round-trip") {
    const auto v = vocab8();
    SampleAnnotation s;
    s.sample_id = "x1";
    s.concepts = {{ConceptId{2}, 0.25, std::array<double, 4>{0.0, 0.125, 0.5, 1.0}}, {ConceptId{4}, 1.0, std::nullopt}};
    s.recaption = "a tree and a ball";
    std::vector<IngestIssue> issues;
    const auto back = parse_annotation_line(serialize_annotation(s, v), v, 1, issues);
    REQUIRE(back);
    CHECK(*back == s);
}

TEST_CASE("AnnotationReader skips a truncated record") {
    Scratch tmp;
    const auto v = vocab8();
    const auto path = tmp.write("ann.jsonl",
                                "{\"id\":\"s0\",\"concepts\":[{\"name\":\"dog\",\"score\":1}]}\n"
                                "{\"id\":\"s1\",\"concepts\":[{\"na\n"
                                "{\"id\":\"s2\",\"concepts\":[{\"name\":\"car\",\"score\":0.5}]}\n");
    AnnotationReader reader(path, v);
    std::vector<std::size_t> reported;
    reader.set_issue_handler([&](const IngestIssue& i) { reported.push_back(i.line); });
    const auto all = read_all(reader);
    REQUIRE(all.size() == 2);
    CHECK(all[0].sample_id == "s0");
    CHECK(all[0].concepts[0].concept_id == ConceptId{7});
    CHECK(all[1].sample_id == "s2");
    CHECK(reported == std::vector<std::size_t>{2});

    reader.rewind();
    CHECK(reader.next()->sample_id == "s0");
    reader.seek_line(2);
    CHECK(reader.next()->sample_id == "s2");
    CHECK_FALSE(reader.next());

    CHECK_THROWS_AS(AnnotationReader(tmp.path("missing.jsonl"), v), IoError);
}
