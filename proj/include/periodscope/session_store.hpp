#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "periodscope/session.hpp"

namespace periodscope {

// One JSON file per session (the export document), replaced atomically after
// every event. Mutations of one session are serialized; distinct sessions are
// independent. Readers always get a complete copy.
class SessionStore {
public:
    SessionStore(std::filesystem::path dir, const KnowledgeGraph& graph, TemporalConfig config);

    // Loads every *.json in the directory. Returns the number loaded.
    std::size_t load_all();

    // Persists and registers a new session. Throws ValidationError if the id
    // is already taken.
    void insert(SearchSession session);

    // Runs `fn` on a private copy; the copy is written to disk and committed
    // only if `fn` returns normally. Throws UnknownSession.
    template <typename Fn>
    auto mutate(const std::string& id, Fn&& fn) {
        auto& entry = lookup(id);
        std::lock_guard lock(entry.mutex);
        SearchSession draft = entry.session;
        if constexpr (std::is_void_v<std::invoke_result_t<Fn, SearchSession&>>) {
            fn(draft);
            persist(draft);
            entry.session = std::move(draft);
        } else {
            auto result = fn(draft);
            persist(draft);
            entry.session = std::move(draft);
            return result;
        }
    }

    SearchSession snapshot(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;

    std::filesystem::path path_for(const std::string& id) const;

private:
    struct Entry {
        std::mutex mutex;
        SearchSession session;
    };

    Entry& lookup(const std::string& id) const;
    void persist(const SearchSession& session) const;

    std::filesystem::path dir_;
    const KnowledgeGraph& graph_;
    TemporalConfig config_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
};

// Writes `data` to a temporary sibling, fsyncs, and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace periodscope
