#include "lifelog/memory_bank.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lifelog/errors.hpp"

namespace lifelog {

using nlohmann::json;

namespace {

std::atomic<uint64_t> g_revision_counter{1};

bool clip_order_less(const ClipEntry& a, const ClipEntry& b) {
    if (a.participant != b.participant) return a.participant < b.participant;
    return a.range.start < b.range.start;
}

}  // namespace

std::string to_string(ClipSource source) {
    switch (source) {
        case ClipSource::model_caption: return "model_caption";
        case ClipSource::human_annotation: return "human_annotation";
        case ClipSource::synthetic: return "synthetic";
    }
    return "model_caption";
}

ClipSource clip_source_from_string(const std::string& text) {
    if (text == "model_caption") return ClipSource::model_caption;
    if (text == "human_annotation") return ClipSource::human_annotation;
    if (text == "synthetic") return ClipSource::synthetic;
    throw Error("unknown clip source '" + text + "'");
}

std::string to_string(SummaryLevel level) {
    return level == SummaryLevel::hour ? "hour" : "day";
}

void BankConfig::validate() const {
    if (clip_seconds < 1) throw Error("clip_seconds must be positive");
    if (hour_window_minutes < 1) throw Error("hour_window_minutes must be positive");
    if (feature_dim && *feature_dim == 0) throw Error("feature_dim must be positive");
    if (static_cast<int64_t>(clip_seconds) > static_cast<int64_t>(hour_window_minutes) * 60) {
        throw Error("clip_seconds exceeds the hour window");
    }
}

std::string WindowKey::node_id() const {
    std::string id = participant + ":d" + std::to_string(day);
    if (!is_day()) id += ":h" + std::to_string(slot);
    return id;
}

TimeRange WindowKey::wall_range(const BankConfig& cfg) const {
    if (is_day()) {
        return {Timestamp{day, 0}, Timestamp{day + 1, 0}};
    }
    const int64_t w = cfg.window_ms();
    const int64_t start = slot * w;
    const int64_t end = std::min<int64_t>((slot + 1) * w, kMsPerDay);
    Timestamp s{day, static_cast<int32_t>(start)};
    Timestamp e = end == kMsPerDay ? Timestamp{day + 1, 0}
                                   : Timestamp{day, static_cast<int32_t>(end)};
    return {s, e};
}

MemoryBank::MemoryBank(BankConfig cfg) : config_(std::move(cfg)) {
    config_.validate();
    bump_revision();
}

void MemoryBank::bump_revision() {
    revision_ = g_revision_counter.fetch_add(1, std::memory_order_relaxed);
}

void MemoryBank::note_participant(const std::string& participant) {
    auto it = std::lower_bound(participants_.begin(), participants_.end(), participant);
    if (it == participants_.end() || *it != participant) participants_.insert(it, participant);
}

std::vector<WindowKey> MemoryBank::hour_windows_of(const TimeRange& range) const {
    std::vector<WindowKey> keys;
    const int64_t w = config_.window_ms();
    const int64_t first = range.start.to_ms();
    const int64_t last = range.end.to_ms() - 1;  // end is exclusive
    for (int64_t ms = first; ms <= last;) {
        Timestamp t = Timestamp::from_ms(ms);
        keys.push_back(WindowKey{"", t.day, static_cast<int32_t>(t.msec_of_day / w)});
        // jump to the start of the next window
        ms = (t.to_ms() / w + 1) * w;
        const int64_t day_start = static_cast<int64_t>(t.day - 1) * kMsPerDay;
        const int64_t window_start = ms - day_start;
        if (window_start >= kMsPerDay) ms = day_start + kMsPerDay;
    }
    return keys;
}

void MemoryBank::add_clip(ClipEntry entry) {
    if (entry.clip_id.empty()) throw Error("add_clip: empty clip_id");
    if (entry.participant.empty()) throw Error("add_clip: empty participant");
    if (!entry.range.valid()) {
        throw Error("add_clip: invalid range " + entry.range.to_string());
    }
    if (entry.caption_text.empty()) throw Error("add_clip: empty caption_text");

    if (entry.feature_vector) {
        for (double v : *entry.feature_vector) {
            if (!std::isfinite(v)) throw Error("add_clip: non-finite feature entry");
        }
        if (config_.feature_dim) {
            if (entry.feature_vector->size() != *config_.feature_dim) {
                throw DimensionError("add_clip: feature vector length " +
                                     std::to_string(entry.feature_vector->size()) +
                                     " != configured " + std::to_string(*config_.feature_dim));
            }
        } else if (entry.feature_vector->empty()) {
            throw DimensionError("add_clip: empty feature vector");
        } else {
            config_.feature_dim = entry.feature_vector->size();  // first vector fixes the dim
        }
    }

    if (find_clip(entry.clip_id)) {
        throw Error("add_clip: duplicate clip_id '" + entry.clip_id + "'");
    }

    auto pos = std::lower_bound(clips_.begin(), clips_.end(), entry, clip_order_less);
    if (pos != clips_.begin()) {
        const ClipEntry& prev = *std::prev(pos);
        if (prev.participant == entry.participant && prev.range.overlaps(entry.range)) {
            throw OverlapError("add_clip: " + entry.range.to_string() + " overlaps " +
                               prev.range.to_string() + " (" + prev.clip_id + ")");
        }
    }
    if (pos != clips_.end()) {
        const ClipEntry& next = *pos;
        if (next.participant == entry.participant && next.range.overlaps(entry.range)) {
            throw OverlapError("add_clip: " + entry.range.to_string() + " overlaps " +
                               next.range.to_string() + " (" + next.clip_id + ")");
        }
    }

    mark_covering_windows_stale(entry);
    note_participant(entry.participant);
    max_clip_ms_ = std::max(max_clip_ms_, entry.range.duration_ms());
    clips_.insert(pos, std::move(entry));
    id_index_dirty_ = true;
    bump_revision();
}

void MemoryBank::mark_covering_windows_stale(const ClipEntry& entry) {
    for (WindowKey key : hour_windows_of(entry.range)) {
        key.participant = entry.participant;
        const std::string id = key.node_id();
        stale_hours_.emplace(id, key);
        if (auto it = hour_index_.find(id); it != hour_index_.end()) it->second.stale = true;

        WindowKey day_key{entry.participant, key.day, -1};
        const std::string day_id = day_key.node_id();
        stale_days_.emplace(day_id, day_key);
        if (auto it = day_index_.find(day_id); it != day_index_.end()) it->second.stale = true;
    }
}

std::vector<const ClipEntry*> MemoryBank::clips_in_window(const WindowKey& key) const {
    const TimeRange window = key.wall_range(config_);
    std::vector<const ClipEntry*> out;
    // Clips are sorted by (participant, start); scan the participant block.
    ClipEntry probe;
    probe.participant = key.participant;
    probe.range.start = Timestamp::from_ms(std::max<int64_t>(0, window.start.to_ms() - max_clip_ms_));
    auto it = std::lower_bound(clips_.begin(), clips_.end(), probe, clip_order_less);
    for (; it != clips_.end() && it->participant == key.participant; ++it) {
        if (it->range.start >= window.end) break;
        if (it->range.overlaps(window)) out.push_back(&*it);
    }
    return out;
}

std::vector<const ClipEntry*> MemoryBank::clips_overlapping(const TimeRange& range) const {
    std::vector<const ClipEntry*> out;
    for (const std::string& participant : participants_) {
        ClipEntry probe;
        probe.participant = participant;
        probe.range.start = Timestamp::from_ms(std::max<int64_t>(0, range.start.to_ms() - max_clip_ms_));
        auto it = std::lower_bound(clips_.begin(), clips_.end(), probe, clip_order_less);
        for (; it != clips_.end() && it->participant == participant; ++it) {
            if (it->range.start >= range.end) break;
            if (it->range.overlaps(range)) out.push_back(&*it);
        }
    }
    return out;
}

void MemoryBank::rebuild_summaries(const Summarizer& summarize) {
    if (clips_.empty()) throw Error("rebuild_summaries: bank has no clips");
    if (!summarize) throw Error("rebuild_summaries: no summarizer");

    std::vector<std::string> failed;
    std::string first_error;
    std::map<std::string, WindowKey> days_to_rebuild = stale_days_;

    // Hour pass, deterministic window order.
    const std::map<std::string, WindowKey> hour_work = stale_hours_;
    for (const auto& [node_id, key] : hour_work) {
        auto clip_ptrs = clips_in_window(key);
        if (clip_ptrs.empty()) {
            // Nothing in this window (cannot happen through add_clip; guards
            // hand-edited files). Drop the marker and any empty node.
            stale_hours_.erase(node_id);
            hour_index_.erase(node_id);
            continue;
        }
        std::sort(clip_ptrs.begin(), clip_ptrs.end(),
                  [](const ClipEntry* a, const ClipEntry* b) {
                      return a->range.start < b->range.start;
                  });
        std::vector<std::string> captions;
        captions.reserve(clip_ptrs.size());
        TimeRange hull = clip_ptrs.front()->range;
        std::vector<std::string> child_ids;
        child_ids.reserve(clip_ptrs.size());
        for (const ClipEntry* clip : clip_ptrs) {
            captions.push_back(clip->caption_text);
            child_ids.push_back(clip->clip_id);
            hull = TimeRange::hull(hull, clip->range);
        }
        try {
            std::string text = summarize(captions, SummaryLevel::hour);
            SummaryNode node;
            node.level = SummaryLevel::hour;
            node.node_id = node_id;
            node.participant = key.participant;
            node.range = hull;
            node.summary_text = std::move(text);
            node.child_ids = std::move(child_ids);
            node.stale = false;
            hour_index_[node_id] = std::move(node);
            stale_hours_.erase(node_id);
        } catch (const std::exception& e) {
            failed.push_back(node_id);
            if (first_error.empty()) first_error = e.what();
        }
    }

    // Day pass: every stale day plus any day that has hour nodes but no
    // day node yet. Days with still-stale hours are rebuilt over the hour
    // nodes that do exist and stay marked stale.
    for (const auto& [hour_id, hour_node] : hour_index_) {
        WindowKey day_key{hour_node.participant, hour_node.range.start.day, -1};
        const std::string day_id = day_key.node_id();
        if (!day_index_.count(day_id)) days_to_rebuild.emplace(day_id, day_key);
    }
    for (const auto& [day_id, day_key] : days_to_rebuild) {
        const std::string prefix = day_id + ":h";
        std::vector<const SummaryNode*> hours;
        for (auto it = hour_index_.lower_bound(prefix);
             it != hour_index_.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
            hours.push_back(&it->second);
        }
        if (hours.empty()) {
            day_index_.erase(day_id);
            stale_days_.erase(day_id);
            continue;
        }
        std::sort(hours.begin(), hours.end(), [](const SummaryNode* a, const SummaryNode* b) {
            return a->range.start < b->range.start;
        });
        const bool hours_incomplete = [&] {
            auto it = stale_hours_.lower_bound(prefix);
            return it != stale_hours_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
        }();
        std::vector<std::string> texts;
        std::vector<std::string> child_ids;
        TimeRange hull = hours.front()->range;
        for (const SummaryNode* h : hours) {
            texts.push_back(h->summary_text);
            child_ids.push_back(h->node_id);
            hull = TimeRange::hull(hull, h->range);
        }
        try {
            std::string text = summarize(texts, SummaryLevel::day);
            SummaryNode node;
            node.level = SummaryLevel::day;
            node.node_id = day_id;
            node.participant = day_key.participant;
            node.range = hull;
            node.summary_text = std::move(text);
            node.child_ids = std::move(child_ids);
            node.stale = hours_incomplete;
            day_index_[day_id] = std::move(node);
            if (hours_incomplete) {
                stale_days_.emplace(day_id, day_key);
            } else {
                stale_days_.erase(day_id);
            }
        } catch (const std::exception& e) {
            failed.push_back(day_id);
            if (first_error.empty()) first_error = e.what();
        }
    }

    bump_revision();
    if (!failed.empty()) {
        const std::string message = "rebuild_summaries: " + std::to_string(failed.size()) +
                                    " window(s) failed, first '" + failed.front() +
                                    "': " + first_error;
        throw GeneratorError(message, std::move(failed));
    }
}

const ClipEntry* MemoryBank::find_clip(const std::string& clip_id) const {
    if (id_index_dirty_) {
        id_index_.clear();
        id_index_.reserve(clips_.size());
        for (size_t i = 0; i < clips_.size(); ++i) id_index_.emplace(clips_[i].clip_id, i);
        id_index_dirty_ = false;
    }
    auto it = id_index_.find(clip_id);
    return it == id_index_.end() ? nullptr : &clips_[it->second];
}

const SummaryNode* MemoryBank::find_node(const std::string& node_id) const {
    if (auto it = hour_index_.find(node_id); it != hour_index_.end()) return &it->second;
    if (auto it = day_index_.find(node_id); it != day_index_.end()) return &it->second;
    return nullptr;
}

std::vector<WindowKey> MemoryBank::stale_windows() const {
    std::vector<WindowKey> out;
    out.reserve(stale_hours_.size() + stale_days_.size());
    for (const auto& [id, key] : stale_hours_) out.push_back(key);
    for (const auto& [id, key] : stale_days_) out.push_back(key);
    return out;
}

bool MemoryBank::has_stale() const { return !stale_hours_.empty() || !stale_days_.empty(); }

bool MemoryBank::has_stale_before(const Timestamp& t) const {
    for (const auto& [id, key] : stale_hours_) {
        if (key.wall_range(config_).start < t) return true;
    }
    for (const auto& [id, key] : stale_days_) {
        if (key.wall_range(config_).start < t) return true;
    }
    return false;
}

bool MemoryBank::operator==(const MemoryBank& other) const {
    return config_ == other.config_ && clips_ == other.clips_ &&
           hour_index_ == other.hour_index_ && day_index_ == other.day_index_ &&
           stale_hours_ == other.stale_hours_ && stale_days_ == other.stale_days_;
}

// ---------------------------------------------------------------------------
// Persistence: one flat JSON record per line.
// ---------------------------------------------------------------------------

namespace {

json range_fields(const TimeRange& r) {
    return json{{"start_day", r.start.day},
                {"start_ms", r.start.msec_of_day},
                {"end_day", r.end.day},
                {"end_ms", r.end.msec_of_day}};
}

TimeRange range_from(const json& rec, size_t line) {
    auto get_int = [&](const char* field) -> int64_t {
        if (!rec.contains(field) || !rec[field].is_number_integer()) {
            throw FormatError(std::string("missing or non-integer '") + field + "'", line);
        }
        return rec[field].get<int64_t>();
    };
    TimeRange r{Timestamp{static_cast<int32_t>(get_int("start_day")),
                          static_cast<int32_t>(get_int("start_ms"))},
                Timestamp{static_cast<int32_t>(get_int("end_day")),
                          static_cast<int32_t>(get_int("end_ms"))}};
    if (!r.valid()) throw FormatError("invalid time range", line);
    return r;
}

std::string get_string(const json& rec, const char* field, size_t line) {
    if (!rec.contains(field) || !rec[field].is_string()) {
        throw FormatError(std::string("missing or non-string '") + field + "'", line);
    }
    return rec[field].get<std::string>();
}

json node_record(const SummaryNode& node) {
    json rec = range_fields(node.range);
    rec["kind"] = to_string(node.level);
    rec["node_id"] = node.node_id;
    rec["participant"] = node.participant;
    rec["summary"] = node.summary_text;
    rec["children"] = node.child_ids;
    rec["stale"] = node.stale;
    return rec;
}

SummaryNode node_from(const json& rec, SummaryLevel level, size_t line) {
    SummaryNode node;
    node.level = level;
    node.node_id = get_string(rec, "node_id", line);
    node.participant = get_string(rec, "participant", line);
    node.range = range_from(rec, line);
    node.summary_text = get_string(rec, "summary", line);
    if (!rec.contains("children") || !rec["children"].is_array()) {
        throw FormatError("missing 'children' array", line);
    }
    for (const auto& c : rec["children"]) {
        if (!c.is_string()) throw FormatError("non-string child id", line);
        node.child_ids.push_back(c.get<std::string>());
    }
    if (!rec.contains("stale") || !rec["stale"].is_boolean()) {
        throw FormatError("missing 'stale' flag", line);
    }
    node.stale = rec["stale"].get<bool>();
    return node;
}

}  // namespace

std::string MemoryBank::serialize() const {
    std::string out;
    json config{{"kind", "config"},
                {"schema_version", 1},
                {"clip_seconds", config_.clip_seconds},
                {"hour_window_minutes", config_.hour_window_minutes}};
    config["feature_dim"] = config_.feature_dim ? json(*config_.feature_dim) : json(nullptr);
    out += config.dump();
    out += '\n';

    for (const ClipEntry& clip : clips_) {
        json rec = range_fields(clip.range);
        rec["kind"] = "clip";
        rec["clip_id"] = clip.clip_id;
        rec["participant"] = clip.participant;
        rec["caption"] = clip.caption_text;
        rec["feature"] = clip.feature_vector ? json(*clip.feature_vector) : json(nullptr);
        rec["source"] = to_string(clip.source);
        out += rec.dump();
        out += '\n';
    }
    for (const auto& [id, node] : hour_index_) {
        out += node_record(node).dump();
        out += '\n';
    }
    for (const auto& [id, node] : day_index_) {
        out += node_record(node).dump();
        out += '\n';
    }
    return out;
}

void MemoryBank::persist(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << serialize();
    if (!out) throw IoError("write to '" + path + "' failed");
}

MemoryBank MemoryBank::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

MemoryBank MemoryBank::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    std::optional<MemoryBank> bank;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(std::string("bad JSON record: ") + e.what(), line_no);
        }
        if (!rec.is_object()) throw FormatError("record is not a JSON object", line_no);
        const std::string kind = get_string(rec, "kind", line_no);

        if (kind == "config") {
            if (bank) throw FormatError("duplicate config record", line_no);
            BankConfig cfg;
            if (!rec.contains("clip_seconds") || !rec["clip_seconds"].is_number_integer()) {
                throw FormatError("config missing 'clip_seconds'", line_no);
            }
            cfg.clip_seconds = rec["clip_seconds"].get<int>();
            if (!rec.contains("hour_window_minutes") ||
                !rec["hour_window_minutes"].is_number_integer()) {
                throw FormatError("config missing 'hour_window_minutes'", line_no);
            }
            cfg.hour_window_minutes = rec["hour_window_minutes"].get<int>();
            if (rec.contains("feature_dim") && !rec["feature_dim"].is_null()) {
                if (!rec["feature_dim"].is_number_integer()) {
                    throw FormatError("config 'feature_dim' must be integer or null", line_no);
                }
                cfg.feature_dim = rec["feature_dim"].get<size_t>();
            }
            try {
                bank.emplace(cfg);
            } catch (const Error& e) {
                throw FormatError(std::string("bad config: ") + e.what(), line_no);
            }
            continue;
        }
        if (!bank) throw FormatError("first record must be 'config', got '" + kind + "'", line_no);

        if (kind == "clip") {
            ClipEntry clip;
            clip.clip_id = get_string(rec, "clip_id", line_no);
            clip.participant = get_string(rec, "participant", line_no);
            clip.range = range_from(rec, line_no);
            clip.caption_text = get_string(rec, "caption", line_no);
            if (!rec.contains("feature")) throw FormatError("clip missing 'feature'", line_no);
            if (!rec["feature"].is_null()) {
                if (!rec["feature"].is_array()) {
                    throw FormatError("clip 'feature' must be array or null", line_no);
                }
                std::vector<double> v;
                for (const auto& x : rec["feature"]) {
                    if (!x.is_number()) throw FormatError("non-numeric feature entry", line_no);
                    v.push_back(x.get<double>());
                }
                clip.feature_vector = std::move(v);
            }
            try {
                clip.source = clip_source_from_string(get_string(rec, "source", line_no));
                bank->add_clip(std::move(clip));
            } catch (const Error& e) {
                throw FormatError(std::string("bad clip record: ") + e.what(), line_no);
            }
        } else if (kind == "hour" || kind == "day") {
            SummaryNode node = node_from(
                rec, kind == "hour" ? SummaryLevel::hour : SummaryLevel::day, line_no);
            for (const std::string& child : node.child_ids) {
                const bool resolves = node.level == SummaryLevel::hour
                                          ? bank->find_clip(child) != nullptr
                                          : bank->hour_index_.count(child) > 0;
                if (!resolves) {
                    throw FormatError("unresolved child id '" + child + "'", line_no);
                }
            }
            auto& index = node.level == SummaryLevel::hour ? bank->hour_index_ : bank->day_index_;
            if (!index.emplace(node.node_id, node).second) {
                throw FormatError("duplicate node id '" + node.node_id + "'", line_no);
            }
        } else {
            throw FormatError("unknown record kind '" + kind + "'", line_no);
        }
    }
    if (!bank) throw FormatError("empty bank file: no config record", std::max<size_t>(line_no, 1));

    // Reconcile staleness: add_clip marked every clip-bearing window stale;
    // a fresh persisted node clears the marker, a stale flag keeps it.
    for (auto it = bank->stale_hours_.begin(); it != bank->stale_hours_.end();) {
        auto node = bank->hour_index_.find(it->first);
        if (node != bank->hour_index_.end() && !node->second.stale) {
            it = bank->stale_hours_.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = bank->stale_days_.begin(); it != bank->stale_days_.end();) {
        auto node = bank->day_index_.find(it->first);
        if (node != bank->day_index_.end() && !node->second.stale) {
            it = bank->stale_days_.erase(it);
        } else {
            ++it;
        }
    }
    // Nodes persisted stale keep their marker even when the window holds no
    // new clips (their key is recovered from the node's own extent).
    for (const auto& [id, node] : bank->hour_index_) {
        if (node.stale && !bank->stale_hours_.count(id)) {
            const int32_t slot =
                static_cast<int32_t>(node.range.start.msec_of_day / bank->config_.window_ms());
            bank->stale_hours_.emplace(
                id, WindowKey{node.participant, node.range.start.day, slot});
        }
    }
    for (const auto& [id, node] : bank->day_index_) {
        if (node.stale && !bank->stale_days_.count(id)) {
            bank->stale_days_.emplace(id, WindowKey{node.participant, node.range.start.day, -1});
        }
    }
    bank->bump_revision();
    return std::move(*bank);
}

}  // namespace lifelog
