#include "periodscope/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "periodscope/error.hpp"

namespace periodscope {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view data) {
    const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw std::system_error(errno, std::generic_category(), "open " + tmp.string());
    std::size_t written = 0;
    while (written < data.size()) {
        const auto n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            const int err = errno;
            ::close(fd);
            throw std::system_error(err, std::generic_category(), "write " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0)
        throw std::system_error(errno, std::generic_category(), "fsync " + tmp.string());
    fs::rename(tmp, path);
}

SessionStore::SessionStore(fs::path dir, const KnowledgeGraph& graph, TemporalConfig config)
    : dir_(std::move(dir)), graph_(graph), config_(config) {
    fs::create_directories(dir_);
}

fs::path SessionStore::path_for(const std::string& id) const { return dir_ / (id + ".json"); }

std::size_t SessionStore::load_all() {
    std::size_t loaded = 0;
    for (const auto& item : fs::directory_iterator(dir_)) {
        const auto& p = item.path();
        if (!item.is_regular_file() || p.extension() != ".json" || p.filename().string().starts_with("."))
            continue;
        std::ifstream in(p, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        auto session = import_session(buf.str(), graph_, config_);
        if (session.session_id != p.stem().string())
            throw ExportFormatError("session file " + p.string() + " holds id " + session.session_id);
        auto entry = std::make_unique<Entry>();
        entry->session = std::move(session);
        std::unique_lock lock(map_mutex_);
        entries_[p.stem().string()] = std::move(entry);
        ++loaded;
    }
    return loaded;
}

void SessionStore::insert(SearchSession session) {
    std::unique_lock lock(map_mutex_);
    if (entries_.contains(session.session_id))
        throw ValidationError("session id already exists: " + session.session_id);
    persist(session);
    auto entry = std::make_unique<Entry>();
    const auto id = session.session_id;
    entry->session = std::move(session);
    entries_.emplace(id, std::move(entry));
}

SessionStore::Entry& SessionStore::lookup(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw UnknownSession(id);
    return *it->second;
}

SearchSession SessionStore::snapshot(const std::string& id) const {
    auto& entry = lookup(id);
    std::lock_guard lock(entry.mutex);
    return entry.session;
}

bool SessionStore::contains(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    return entries_.contains(id);
}

std::vector<std::string> SessionStore::ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : entries_) out.push_back(id);
    return out;
}

void SessionStore::persist(const SearchSession& session) const {
    write_file_atomic(path_for(session.session_id), export_session(session));
}

}  // namespace periodscope
