#include <thread>

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "periodscope/error.hpp"
#include "periodscope/session_store.hpp"
#include "test_support.hpp"

using namespace periodscope;
using namespace periodscope::testing;
namespace fs = std::filesystem;

namespace {

const Iri fr = cat("French_Revolution");
const Iri robespierre = res("Maximilien_Robespierre");
const Iri bastille = res("Bastille");

SearchSession make(const std::string& id) {
    return create_session(toy_graph(), "motivation", revolution(), {fr}, 2, {}, fixed_clock(), id);
}

}  // namespace

TEST_CASE("inserted sessions are written as their export document") {
    const auto dir = temp_dir("store-insert");
    SessionStore store(dir, toy_graph(), {});
    store.insert(make("s-one"));
    CHECK(store.contains("s-one"));
    CHECK(read_file(store.path_for("s-one")) == export_session(make("s-one")));
    CHECK_THROWS_AS(store.insert(make("s-one")), ValidationError);
    CHECK_THROWS_AS(store.snapshot("s-missing"), UnknownSession);
    CHECK_THROWS_AS(store.mutate("s-missing", [](SearchSession&) {}), UnknownSession);
    fs::remove_all(dir);
}

TEST_CASE("every mutation reaches disk before mutate returns") {
    const auto dir = temp_dir("store-mutate");
    SessionStore store(dir, toy_graph(), {});
    store.insert(make("s-a"));
    const auto seq = store.mutate("s-a", [](SearchSession& s) {
        return record_decision(s, Action::Deselect, TargetKind::Entity, robespierre).seq;
    });
    CHECK(seq == 8);
    const auto on_disk = nlohmann::json::parse(read_file(store.path_for("s-a")));
    CHECK(on_disk["decisions"].size() == 8);
    CHECK(on_disk["decisions"][7]["target"] == robespierre.str());

    // No temporary files are left behind.
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    fs::remove_all(dir);
}

TEST_CASE("a failed mutation leaves memory and disk untouched") {
    const auto dir = temp_dir("store-fail");
    SessionStore store(dir, toy_graph(), {});
    store.insert(make("s-a"));
    const auto before = read_file(store.path_for("s-a"));
    CHECK_THROWS_AS(store.mutate("s-a",
                                 [](SearchSession& s) {
                                     record_decision(s, Action::Deselect, TargetKind::Entity, robespierre);
                                     record_decision(s, Action::Select, TargetKind::Entity, res("Nobody"));
                                 }),
                    UnknownTarget);
    CHECK(store.snapshot("s-a").decisions.size() == 7);
    CHECK(read_file(store.path_for("s-a")) == before);
    fs::remove_all(dir);
}

TEST_CASE("a reopened store sees the same sessions") {
    const auto dir = temp_dir("store-reload");
    std::string exported;
    {
        SessionStore store(dir, toy_graph(), {});
        store.insert(make("s-a"));
        store.insert(make("s-b"));
        store.mutate("s-b", [](SearchSession& s) {
            record_decision(s, Action::Deselect, TargetKind::Entity, bastille);
            record_decision(s, Action::Select, TargetKind::Entity, bastille);
        });
        exported = export_session(store.snapshot("s-b"));
    }
    // Stray files must be ignored.
    write_file_atomic(dir / "notes.txt", "hello");
    write_file_atomic(dir / ".s-c.json.tmp", "{");

    SessionStore reopened(dir, toy_graph(), {});
    CHECK(reopened.load_all() == 2);
    CHECK(reopened.ids() == std::vector<std::string>{"s-a", "s-b"});
    CHECK(export_session(reopened.snapshot("s-b")) == exported);
    const auto next = reopened.mutate("s-b", [](SearchSession& s) {
        return record_decision(s, Action::Deselect, TargetKind::Entity, bastille).seq;
    });
    CHECK(next == 10);
    fs::remove_all(dir);
}

TEST_CASE("a session file under the wrong name is rejected") {
    const auto dir = temp_dir("store-mismatch");
    write_file_atomic(dir / "s-other.json", export_session(make("s-a")));
    SessionStore store(dir, toy_graph(), {});
    CHECK_THROWS_AS(store.load_all(), ExportFormatError);
    fs::remove_all(dir);
}

TEST_CASE("concurrent writers on one session are serialized") {
    const auto dir = temp_dir("store-concurrent");
    SessionStore store(dir, toy_graph(), {});
    store.insert(make("s-a"));
    store.insert(make("s-b"));

    constexpr int kThreads = 8;
    constexpr int kEach = 25;
    std::vector<std::thread> pool;
    for (int t = 0; t < kThreads; ++t) {
        pool.emplace_back([&, t] {
            const std::string id = t % 2 ? "s-a" : "s-b";
            for (int i = 0; i < kEach; ++i) {
                store.mutate(id, [&](SearchSession& s) {
                    record_decision(s, i % 2 ? Action::Select : Action::Deselect, TargetKind::Entity, robespierre);
                });
                const auto snap = store.snapshot(id);
                for (std::size_t k = 0; k < snap.decisions.size(); ++k) REQUIRE(snap.decisions[k].seq == k + 1);
            }
        });
    }
    for (auto& th : pool) th.join();

    for (const std::string id : {"s-a", "s-b"}) {
        const auto s = store.snapshot(id);
        CHECK(s.decisions.size() == 7 + kThreads / 2 * kEach);
        CHECK(read_file(store.path_for(id)) == export_session(s));
    }
    fs::remove_all(dir);
}
