#include "lifelog/synthlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lifelog/errors.hpp"
#include "lifelog/similarity.hpp"

namespace lifelog {

using nlohmann::json;

std::string to_string(CertBucket bucket) {
    switch (bucket) {
        case CertBucket::lt_2h: return "<2h";
        case CertBucket::h2_to_6h: return "2h-6h";
        case CertBucket::h6_to_24h: return "6h-24h";
        case CertBucket::gt_24h: return ">24h";
    }
    return "<2h";
}

CertBucket cert_bucket_from_string(const std::string& label) {
    for (CertBucket b : kAllBuckets) {
        if (to_string(b) == label) return b;
    }
    throw Error("unknown certificate bucket '" + label + "'");
}

CertBucket bucketize(int64_t certificate_ms) {
    if (certificate_ms <= 0) throw Error("bucketize: certificate must be positive");
    if (certificate_ms < 2 * kMsPerHour) return CertBucket::lt_2h;
    if (certificate_ms < 6 * kMsPerHour) return CertBucket::h2_to_6h;
    if (certificate_ms < 24 * kMsPerHour) return CertBucket::h6_to_24h;
    return CertBucket::gt_24h;
}

namespace {

// splitmix64: deterministic across platforms, cheap to split.
struct Rng {
    uint64_t state;

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    uint64_t bounded(uint64_t n) { return next() % n; }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    Rng r{seed ^ (0xA0761D6478BD642FULL * (stream + 1))};
    return r.next();
}

struct Activity {
    const char* name;
    std::vector<const char*> verbs;
    std::vector<const char*> objects;
    std::vector<const char*> places;
};

// 14 daily-life activity categories. Vocabulary is disjoint from the
// stopword list and digit-free (fact tokens carry digits, so the two can
// never collide).
const std::vector<Activity>& activities() {
    static const std::vector<Activity> kActivities = {
        {"cooking",
         {"chopped", "stirred", "seasoned", "fried"},
         {"carrot", "onion", "noodle", "dumpling", "pancake", "broth"},
         {"stove", "counter", "sink", "pantry"}},
        {"eating",
         {"tasted", "shared", "finished", "served"},
         {"salad", "soup", "sandwich", "dessert", "porridge", "fruit"},
         {"table", "balcony", "terrace", "bench"}},
        {"cleaning",
         {"wiped", "swept", "scrubbed", "rinsed"},
         {"floor", "window", "dish", "shelf", "mirror", "bucket"},
         {"bathroom", "hallway", "stairwell", "porch"}},
        {"shopping",
         {"browsed", "bought", "compared", "carried"},
         {"groceries", "ribbon", "lantern", "poster", "basket", "snack"},
         {"market", "mall", "stall", "checkout"}},
        {"meeting",
         {"discussed", "planned", "presented", "reviewed"},
         {"agenda", "schedule", "budget", "checklist", "proposal", "timeline"},
         {"whiteboard", "projector", "lounge", "studio"}},
        {"rehearsal",
         {"practiced", "repeated", "timed", "polished"},
         {"chorus", "verse", "harmony", "melody", "routine", "scene"},
         {"stage", "garage", "courtyard", "basement"}},
        {"music",
         {"strummed", "tuned", "played", "recorded"},
         {"guitar", "ukulele", "keyboard", "drum", "microphone", "amplifier"},
         {"attic", "bedroom", "rooftop", "alcove"}},
        {"gaming",
         {"played", "won", "lost", "streamed"},
         {"chess", "cards", "puzzle", "console", "controller", "dice"},
         {"couch", "den", "loft", "carpet"}},
        {"reading",
         {"read", "skimmed", "annotated", "quoted"},
         {"novel", "magazine", "article", "comic", "manual", "pamphlet"},
         {"armchair", "library", "windowsill", "hammock"}},
        {"exercise",
         {"stretched", "jogged", "lifted", "balanced"},
         {"dumbbell", "mat", "rope", "kettlebell", "band", "bicycle"},
         {"garden", "park", "driveway", "gym"}},
        {"crafting",
         {"glued", "folded", "painted", "trimmed"},
         {"cardboard", "origami", "banner", "garland", "stencil", "bead"},
         {"workbench", "desk", "workshop", "veranda"}},
        {"decorating",
         {"hung", "arranged", "taped", "draped"},
         {"streamer", "balloon", "wreath", "bunting", "lights", "ornament"},
         {"doorway", "ceiling", "mantel", "railing"}},
        {"gardening",
         {"watered", "planted", "pruned", "repotted"},
         {"basil", "fern", "succulent", "seedling", "tulip", "moss"},
         {"greenhouse", "patio", "planter", "yard"}},
        {"chatting",
         {"joked", "chatted", "debated", "gossiped"},
         {"story", "rumor", "memory", "plan", "recipe", "riddle"},
         {"kitchen", "corridor", "doorstep", "fireplace"}},
    };
    return kActivities;
}

// Storage spots where facts get planted; the answer/distractor pool.
const std::vector<const char*>& fact_places() {
    static const std::vector<const char*> kPlaces = {
        "wardrobe", "suitcase", "drawer", "cupboard", "backpack", "toolbox",
        "locker",   "crate",    "bin",    "chest",    "trunk",    "cabinet"};
    return kPlaces;
}

std::string background_caption(const Activity& act, Rng& rng) {
    const char* v = act.verbs[rng.bounded(act.verbs.size())];
    const char* o = act.objects[rng.bounded(act.objects.size())];
    const char* p = act.places[rng.bounded(act.places.size())];
    switch (rng.bounded(4)) {
        case 0: return std::string("I ") + v + " the " + o + " near the " + p + ".";
        case 1: return std::string("I ") + v + " the " + o + " and moved it to the " + p + ".";
        case 2: return std::string("While at the ") + p + ", I " + v + " the " + o + ".";
        default: return std::string("I quietly ") + v + " the " + o + " beside the " + p + ".";
    }
}

// Question templates deliberately share no content token with the
// background grammar or the fact sentence (checked by a test); the unique
// token alone carries the retrieval signal, so summary routing is never
// polluted by template words.
std::string question_for(QaType type, const std::string& token) {
    switch (type) {
        case QaType::EntityLog: return "Where was the " + token + " left?";
        case QaType::EventRecall: return "Which spot featured the " + token + " earlier?";
        case QaType::HabitInsight:
            return "Around which spot did the " + token + " habit recur?";
        case QaType::RelationMap:
            return "Which spot did someone pick to hand over the " + token + "?";
        case QaType::TaskMaster:
            return "Which spot needs checking to fetch the " + token + "?";
    }
    return "Where was the " + token + " left?";
}

struct Slot {
    int participant;  // index
    int32_t day;
    int hour;  // wall-clock hour
    int slot;  // clip index within the hour
};

std::string participant_label(int index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "p%02d", index + 1);
    return buf;
}

std::string clip_id_for(const std::string& participant, int32_t day, int hour, int slot) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-d%d-h%02d-s%03d", day, hour, slot);
    return participant + buf;
}

std::vector<double> random_unit_vector(size_t dim, Rng& rng) {
    std::vector<double> v(dim);
    double norm_sq = 0.0;
    for (size_t i = 0; i < dim; i += 2) {
        // Box-Muller over the splittable stream
        const double u1 = std::max(rng.unit(), 1e-300);
        const double u2 = rng.unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        v[i] = r * std::cos(2.0 * M_PI * u2);
        if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
    }
    for (double x : v) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    if (norm > 0) {
        for (double& x : v) x /= norm;
    } else {
        v[0] = 1.0;
    }
    return v;
}

}  // namespace

void SynthSpec::validate() const {
    if (days < 1) throw InfeasibleSpecError("days must be >= 1");
    if (participants < 1) throw InfeasibleSpecError("participants must be >= 1");
    if (clips_per_hour < 1) throw InfeasibleSpecError("clips_per_hour must be >= 1");
    if (active_hours_per_day < 1 || active_hours_per_day > 24) {
        throw InfeasibleSpecError("active_hours_per_day must be in [1, 24]");
    }
    if (planted_facts < 0) throw InfeasibleSpecError("planted_facts must be >= 0");
    if (clip_seconds < 1) throw InfeasibleSpecError("clip_seconds must be >= 1");
    if (static_cast<int64_t>(clips_per_hour) * clip_seconds > 3600) {
        throw InfeasibleSpecError("clips_per_hour * clip_seconds exceeds one hour");
    }
    double total = 0.0;
    for (const auto& [bucket, fraction] : certificate_mix) {
        if (fraction < 0) throw InfeasibleSpecError("certificate fraction must be >= 0");
        total += fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InfeasibleSpecError("certificate_mix fractions must sum to 1");
    }
    const int64_t slots = static_cast<int64_t>(participants) * days * active_hours_per_day *
                          clips_per_hour;
    if (planted_facts > slots) {
        throw InfeasibleSpecError("more planted facts than clip slots");
    }
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();

    const int first_hour = std::min(9, 24 - spec.active_hours_per_day);
    const int64_t clip_ms = static_cast<int64_t>(spec.clip_seconds) * kMsPerSecond;
    const int64_t end_abs = static_cast<int64_t>(spec.days) * kMsPerDay - 1;  // last askable ms

    // Background captions, one independent stream per participant.
    // captions[p][day-1][hour_idx][slot]
    std::vector<std::vector<std::vector<std::vector<std::string>>>> captions(spec.participants);
    const auto& acts = activities();
    for (int p = 0; p < spec.participants; ++p) {
        Rng rng{mix_seed(spec.seed, static_cast<uint64_t>(p))};
        captions[p].resize(spec.days);
        for (int32_t day = 1; day <= spec.days; ++day) {
            auto& day_captions = captions[p][day - 1];
            day_captions.resize(spec.active_hours_per_day);
            for (int h = 0; h < spec.active_hours_per_day; ++h) {
                const Activity& act = acts[rng.bounded(acts.size())];
                auto& hour_captions = day_captions[h];
                hour_captions.reserve(spec.clips_per_hour);
                for (int s = 0; s < spec.clips_per_hour; ++s) {
                    hour_captions.push_back(background_caption(act, rng));
                }
            }
        }
    }

    // Certificate bucket counts: largest-remainder rounding, exact total.
    struct BucketRange {
        CertBucket bucket;
        int64_t lo;  // inclusive
        int64_t hi;  // exclusive, 0 = unbounded
    };
    const BucketRange ranges[] = {
        {CertBucket::lt_2h, kMinLookbackMs, 2 * kMsPerHour},
        {CertBucket::h2_to_6h, 2 * kMsPerHour, 6 * kMsPerHour},
        {CertBucket::h6_to_24h, 6 * kMsPerHour, 24 * kMsPerHour},
        {CertBucket::gt_24h, 24 * kMsPerHour, 0},
    };
    std::vector<int> bucket_counts(4, 0);
    {
        std::vector<std::pair<double, int>> remainders;
        int assigned = 0;
        for (int b = 0; b < 4; ++b) {
            auto it = spec.certificate_mix.find(ranges[b].bucket);
            const double frac = it == spec.certificate_mix.end() ? 0.0 : it->second;
            const double exact = frac * spec.planted_facts;
            bucket_counts[b] = static_cast<int>(exact);
            assigned += bucket_counts[b];
            remainders.push_back({exact - bucket_counts[b], b});
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int i = 0; assigned < spec.planted_facts; ++i, ++assigned) {
            bucket_counts[remainders[i % 4].second] += 1;
        }
    }

    const int64_t first_slot_abs = Timestamp{1, static_cast<int32_t>(first_hour * kMsPerHour)}.to_ms();
    for (int b = 0; b < 4; ++b) {
        if (bucket_counts[b] > 0 && first_slot_abs + ranges[b].lo > end_abs) {
            throw InfeasibleSpecError("certificate bucket " + to_string(ranges[b].bucket) +
                                      " does not fit inside the timeline");
        }
    }

    // Plant facts.
    Rng fact_rng{mix_seed(spec.seed, 0xFAC7)};
    const int64_t total_slots = static_cast<int64_t>(spec.participants) * spec.days *
                                spec.active_hours_per_day * spec.clips_per_hour;
    std::unordered_set<int64_t> used_slots;
    std::vector<PlantedFact> facts;
    std::vector<QaItem> items;
    facts.reserve(spec.planted_facts);
    items.reserve(spec.planted_facts);
    const auto& places = fact_places();

    int fact_index = 0;
    for (int b = 0; b < 4; ++b) {
        for (int n = 0; n < bucket_counts[b]; ++n, ++fact_index) {
            // A slot whose start leaves room for the bucket's minimum
            // certificate before the timeline ends.
            Slot slot{};
            int64_t planted_abs = 0;
            bool found = false;
            for (int attempt = 0; attempt < 100000; ++attempt) {
                const int64_t flat = static_cast<int64_t>(fact_rng.bounded(total_slots));
                int64_t rest = flat;
                slot.participant = static_cast<int>(rest % spec.participants);
                rest /= spec.participants;
                slot.day = static_cast<int32_t>(rest % spec.days) + 1;
                rest /= spec.days;
                slot.hour = first_hour + static_cast<int>(rest % spec.active_hours_per_day);
                rest /= spec.active_hours_per_day;
                slot.slot = static_cast<int>(rest);
                planted_abs = Timestamp{slot.day,
                                        static_cast<int32_t>(slot.hour * kMsPerHour +
                                                             slot.slot * clip_ms)}
                                  .to_ms();
                if (planted_abs + ranges[b].lo > end_abs) continue;
                if (used_slots.count(flat)) continue;
                used_slots.insert(flat);
                found = true;
                break;
            }
            if (!found) {
                throw InfeasibleSpecError("could not place fact " + std::to_string(fact_index) +
                                          " in bucket " + to_string(ranges[b].bucket));
            }

            const int64_t lo = ranges[b].lo;
            const int64_t hi = ranges[b].hi == 0 ? end_abs - planted_abs
                                                 : std::min(ranges[b].hi - 1, end_abs - planted_abs);
            const int64_t cert = lo + static_cast<int64_t>(fact_rng.bounded(hi - lo + 1));

            PlantedFact fact;
            char letters[6] = {};
            for (int i = 0; i < 5; ++i) letters[i] = static_cast<char>('a' + fact_rng.bounded(26));
            fact.fact_id = "fact-" + std::to_string(fact_index);
            fact.unique_token = std::string("zq") + letters + "x" + std::to_string(fact_index) + "q";
            fact.participant = participant_label(slot.participant);
            fact.planted_at = Timestamp::from_ms(planted_abs);
            fact.place = places[fact_rng.bounded(places.size())];
            fact.fact_text = "I placed the special " + fact.unique_token + " marker inside the " +
                             fact.place + ".";
            fact.clip_id = clip_id_for(fact.participant, slot.day, slot.hour, slot.slot);

            auto& caption = captions[slot.participant][slot.day - 1][slot.hour - first_hour]
                                    [slot.slot];
            caption += " " + fact.fact_text;

            QaItem item;
            item.qa_id = "qa-" + std::to_string(fact_index);
            item.participant = fact.participant;
            item.qa_type = kAllQaTypes[fact_index % 5];
            item.question = question_for(item.qa_type, fact.unique_token);
            item.asked_at = Timestamp::from_ms(planted_abs + cert);
            item.evidence_at = {fact.planted_at};
            item.certificate_ms = cert;
            item.needs_audio = false;
            item.answer_index = static_cast<int>(fact_rng.bounded(4));
            std::vector<std::string> distractors;
            while (distractors.size() < 3) {
                std::string candidate = places[fact_rng.bounded(places.size())];
                if (candidate == fact.place) continue;
                if (std::find(distractors.begin(), distractors.end(), candidate) !=
                    distractors.end()) {
                    continue;
                }
                distractors.push_back(std::move(candidate));
            }
            int d = 0;
            for (int c = 0; c < 4; ++c) {
                item.choices[c] = c == item.answer_index ? fact.place : distractors[d++];
            }

            facts.push_back(std::move(fact));
            items.push_back(std::move(item));
        }
    }

    // Assemble the bank in canonical order (append path of add_clip).
    BankConfig cfg;
    cfg.clip_seconds = spec.clip_seconds;
    cfg.hour_window_minutes = 60;
    if (spec.feature_dim > 0) cfg.feature_dim = spec.feature_dim;
    MemoryBank bank(cfg);
    for (int p = 0; p < spec.participants; ++p) {
        Rng feature_rng{mix_seed(spec.seed, 0xFEA7000ULL + static_cast<uint64_t>(p))};
        const std::string participant = participant_label(p);
        for (int32_t day = 1; day <= spec.days; ++day) {
            for (int h = 0; h < spec.active_hours_per_day; ++h) {
                const int hour = first_hour + h;
                for (int s = 0; s < spec.clips_per_hour; ++s) {
                    ClipEntry clip;
                    clip.clip_id = clip_id_for(participant, day, hour, s);
                    clip.participant = participant;
                    const int64_t start = hour * kMsPerHour + s * clip_ms;
                    const int64_t end = start + clip_ms;
                    clip.range.start = Timestamp{day, static_cast<int32_t>(start)};
                    clip.range.end = end == kMsPerDay ? Timestamp{day + 1, 0}
                                                      : Timestamp{day, static_cast<int32_t>(end)};
                    clip.caption_text = captions[p][day - 1][h][s];
                    clip.source = ClipSource::synthetic;
                    if (spec.feature_dim > 0) {
                        clip.feature_vector = random_unit_vector(spec.feature_dim, feature_rng);
                    }
                    bank.add_clip(std::move(clip));
                }
            }
        }
    }

    return SynthResult{std::move(bank), std::move(items), std::move(facts)};
}

UniquenessReport verify_uniqueness(const MemoryBank& bank, std::span<const PlantedFact> facts) {
    std::unordered_map<std::string, size_t> counts;
    counts.reserve(facts.size());
    for (const PlantedFact& fact : facts) counts[fact.unique_token] = 0;

    UniquenessReport report;
    for (const ClipEntry& clip : bank.clips()) {
        ++report.captions_scanned;
        for (const std::string& token : tokenize(clip.caption_text)) {
            auto it = counts.find(token);
            if (it != counts.end()) it->second += 1;
        }
    }
    std::vector<std::string> offending;
    for (const PlantedFact& fact : facts) {
        ++report.facts_checked;
        if (counts[fact.unique_token] != 1) offending.push_back(fact.unique_token);
    }
    if (!offending.empty()) {
        throw UniquenessError("verify_uniqueness: " + std::to_string(offending.size()) +
                                  " token(s) are not unique, first '" + offending.front() + "'",
                              std::move(offending));
    }
    return report;
}

std::string serialize_facts(std::span<const PlantedFact> facts) {
    json doc = json::array();
    for (const PlantedFact& fact : facts) {
        doc.push_back({{"fact_id", fact.fact_id},
                       {"unique_token", fact.unique_token},
                       {"planted_day", fact.planted_at.day},
                       {"planted_ms", fact.planted_at.msec_of_day},
                       {"fact_text", fact.fact_text},
                       {"clip_id", fact.clip_id},
                       {"participant", fact.participant},
                       {"place", fact.place}});
    }
    return doc.dump(2) + "\n";
}

std::vector<PlantedFact> parse_facts(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("facts file is not valid JSON: ") + e.what(), "");
    }
    if (!doc.is_array()) throw SchemaError("facts file must be a JSON array", "");
    std::vector<PlantedFact> facts;
    for (size_t i = 0; i < doc.size(); ++i) {
        const json& obj = doc[i];
        auto str = [&](const char* field) {
            if (!obj.contains(field) || !obj[field].is_string()) {
                throw SchemaError("missing or non-string field", "/" + std::to_string(i) + "/" + field);
            }
            return obj[field].get<std::string>();
        };
        auto num = [&](const char* field) {
            if (!obj.contains(field) || !obj[field].is_number_integer()) {
                throw SchemaError("missing or non-integer field", "/" + std::to_string(i) + "/" + field);
            }
            return obj[field].get<int32_t>();
        };
        PlantedFact fact;
        fact.fact_id = str("fact_id");
        fact.unique_token = str("unique_token");
        fact.planted_at = Timestamp{num("planted_day"), num("planted_ms")};
        fact.fact_text = str("fact_text");
        fact.clip_id = str("clip_id");
        fact.participant = str("participant");
        fact.place = str("place");
        facts.push_back(std::move(fact));
    }
    return facts;
}

std::vector<PlantedFact> load_facts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_facts(buf.str());
}

}  // namespace lifelog
