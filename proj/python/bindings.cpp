#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lifelog/errors.hpp"
#include "lifelog/evaluation.hpp"
#include "lifelog/generation.hpp"
#include "lifelog/memory_bank.hpp"
#include "lifelog/qa.hpp"
#include "lifelog/retrieval.hpp"
#include "lifelog/similarity.hpp"
#include "lifelog/srt.hpp"
#include "lifelog/synthlog.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace lifelog;

namespace {

py::dict clip_to_dict(const ClipEntry& clip) {
    py::dict d;
    d["clip_id"] = clip.clip_id;
    d["participant"] = clip.participant;
    d["start_day"] = clip.range.start.day;
    d["start_ms"] = clip.range.start.msec_of_day;
    d["end_day"] = clip.range.end.day;
    d["end_ms"] = clip.range.end.msec_of_day;
    d["caption"] = clip.caption_text;
    if (clip.feature_vector) {
        d["feature"] = *clip.feature_vector;
    } else {
        d["feature"] = py::none();
    }
    d["source"] = to_string(clip.source);
    return d;
}

py::dict block_to_dict(const SrtBlock& block) {
    py::dict d;
    d["index"] = block.index;
    d["start_ms"] = block.range.start.msec_of_day;
    d["end_ms"] = block.range.end.msec_of_day;
    d["action"] = block.action;
    d["interactive_instance"] = block.interactive_instance;
    d["merged_caption"] = block.merged_caption;
    if (block.visual_audio_caption) {
        d["visual_audio_caption"] = *block.visual_audio_caption;
    } else {
        d["visual_audio_caption"] = py::none();
    }
    d["extras"] = block.extras;
    return d;
}

SrtBlock block_from_dict(const py::dict& d) {
    SrtBlock block;
    block.index = d["index"].cast<int>();
    block.range = {Timestamp{1, d["start_ms"].cast<int32_t>()},
                   Timestamp{1, d["end_ms"].cast<int32_t>()}};
    block.action = d["action"].cast<std::string>();
    block.interactive_instance = d["interactive_instance"].cast<std::string>();
    block.merged_caption = d["merged_caption"].cast<std::string>();
    if (!d["visual_audio_caption"].is_none()) {
        block.visual_audio_caption = d["visual_audio_caption"].cast<std::string>();
    }
    if (d.contains("extras")) block.extras = d["extras"].cast<std::vector<std::string>>();
    return block;
}

py::dict qa_to_dict(const QaItem& item) {
    py::dict d;
    d["qa_id"] = item.qa_id;
    d["participant"] = item.participant;
    d["question"] = item.question;
    d["choices"] = item.choices;
    d["answer_index"] = item.answer_index;
    d["qa_type"] = to_string(item.qa_type);
    d["asked_day"] = item.asked_at.day;
    d["asked_ms"] = item.asked_at.msec_of_day;
    py::list evidence;
    for (const Timestamp& t : item.evidence_at) {
        py::dict e;
        e["day"] = t.day;
        e["ms"] = t.msec_of_day;
        evidence.append(e);
    }
    d["evidence"] = evidence;
    d["certificate_ms"] = item.certificate_ms;
    d["needs_audio"] = item.needs_audio;
    return d;
}

QaItem qa_from_dict(const py::dict& d) {
    QaItem item;
    item.qa_id = d["qa_id"].cast<std::string>();
    item.participant = d["participant"].cast<std::string>();
    item.question = d["question"].cast<std::string>();
    item.choices = d["choices"].cast<std::array<std::string, 4>>();
    item.answer_index = d["answer_index"].cast<int>();
    item.qa_type = qa_type_from_string(d["qa_type"].cast<std::string>());
    item.asked_at = Timestamp{d["asked_day"].cast<int32_t>(), d["asked_ms"].cast<int32_t>()};
    for (const auto& e : d["evidence"].cast<py::list>()) {
        const py::dict ed = e.cast<py::dict>();
        item.evidence_at.push_back(Timestamp{ed["day"].cast<int32_t>(), ed["ms"].cast<int32_t>()});
    }
    item.certificate_ms = d["certificate_ms"].cast<int64_t>();
    item.needs_audio = d["needs_audio"].cast<bool>();
    return item;
}

py::dict fact_to_dict(const PlantedFact& fact) {
    py::dict d;
    d["fact_id"] = fact.fact_id;
    d["unique_token"] = fact.unique_token;
    d["planted_day"] = fact.planted_at.day;
    d["planted_ms"] = fact.planted_at.msec_of_day;
    d["fact_text"] = fact.fact_text;
    d["clip_id"] = fact.clip_id;
    d["participant"] = fact.participant;
    d["place"] = fact.place;
    return d;
}

PlantedFact fact_from_dict(const py::dict& d) {
    PlantedFact fact;
    fact.fact_id = d["fact_id"].cast<std::string>();
    fact.unique_token = d["unique_token"].cast<std::string>();
    fact.planted_at = Timestamp{d["planted_day"].cast<int32_t>(), d["planted_ms"].cast<int32_t>()};
    fact.fact_text = d["fact_text"].cast<std::string>();
    fact.clip_id = d["clip_id"].cast<std::string>();
    fact.participant = d["participant"].cast<std::string>();
    fact.place = d["place"].cast<std::string>();
    return fact;
}

py::dict result_to_dict(const RetrievalResult& result, const MemoryBank& bank) {
    py::dict d;
    d["mode"] = to_string(result.mode);
    py::list evidence;
    for (const ScoredClip& sc : result.evidence) {
        py::dict e;
        e["clip_id"] = sc.clip_id;
        e["score"] = sc.score;
        e["feature"] = sc.channel_scores.feature;
        e["text"] = sc.channel_scores.text;
        if (const ClipEntry* clip = bank.find_clip(sc.clip_id)) {
            e["caption"] = clip->caption_text;
        }
        evidence.append(e);
    }
    d["evidence"] = evidence;
    py::list windows;
    for (const SearchedWindow& w : result.searched_windows) {
        py::dict wd;
        wd["level"] = to_string(w.level);
        wd["start_day"] = w.range.start.day;
        wd["start_ms"] = w.range.start.msec_of_day;
        wd["end_day"] = w.range.end.day;
        wd["end_ms"] = w.range.end.msec_of_day;
        windows.append(wd);
    }
    d["searched_windows"] = windows;
    return d;
}

LexicalBackend backend_for(const MemoryBank& bank) {
    std::vector<std::string> captions;
    captions.reserve(bank.size());
    for (const ClipEntry& clip : bank.clips()) captions.push_back(clip.caption_text);
    if (captions.empty()) captions.push_back("empty");
    return fit_corpus(captions);
}

RetrievalConfig config_from(double lam, int top_k, int days_to_expand, int hours_to_expand,
                            double fallback_threshold, bool causal) {
    RetrievalConfig cfg;
    cfg.lambda = lam;
    cfg.top_k = top_k;
    cfg.days_to_expand = days_to_expand;
    cfg.hours_to_expand = hours_to_expand;
    cfg.fallback_threshold = fallback_threshold;
    cfg.causal = causal;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical retrieval QA over timestamped caption streams";

    py::register_exception<Error>(m, "LifelogError", PyExc_RuntimeError);

    py::class_<BankConfig>(m, "BankConfig")
        .def(py::init<>())
        .def_readwrite("clip_seconds", &BankConfig::clip_seconds)
        .def_readwrite("hour_window_minutes", &BankConfig::hour_window_minutes);

    py::class_<RetrievalConfig>(m, "RetrievalConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &RetrievalConfig::lambda)
        .def_readwrite("top_k", &RetrievalConfig::top_k)
        .def_readwrite("days_to_expand", &RetrievalConfig::days_to_expand)
        .def_readwrite("hours_to_expand", &RetrievalConfig::hours_to_expand)
        .def_readwrite("fallback_threshold", &RetrievalConfig::fallback_threshold)
        .def_readwrite("causal", &RetrievalConfig::causal);

    py::class_<Query>(m, "Query")
        .def(py::init([](const std::string& question, int day, int ms) {
                 return Query::make(question, Timestamp{day, ms});
             }),
             py::arg("question"), py::arg("day"), py::arg("ms"))
        .def_readwrite("question_text", &Query::question_text);

    py::class_<MemoryBank>(m, "MemoryBank")
        .def(py::init<>())
        .def(py::init([](const BankConfig& cfg) { return MemoryBank(cfg); }))
        .def_property_readonly("size", &MemoryBank::size)
        .def("add_clip",
             [](MemoryBank& bank, const std::string& clip_id, const std::string& participant,
                int day, int start_ms, int end_ms, const std::string& caption,
                std::optional<std::vector<double>> feature, const std::string& source,
                std::optional<int> end_day) {
                 ClipEntry clip;
                 clip.clip_id = clip_id;
                 clip.participant = participant;
                 clip.range = {Timestamp{day, start_ms},
                               Timestamp{end_day.value_or(day), end_ms}};
                 clip.caption_text = caption;
                 clip.feature_vector = std::move(feature);
                 clip.source = clip_source_from_string(source);
                 bank.add_clip(std::move(clip));
             },
             py::arg("clip_id"), py::arg("participant"), py::arg("day"), py::arg("start_ms"),
             py::arg("end_ms"), py::arg("caption"), py::arg("feature") = py::none(),
             py::arg("source") = "model_caption", py::arg("end_day") = py::none())
        .def("rebuild_summaries_mock",
             [](MemoryBank& bank, size_t char_limit) {
                 MockGenerator::Options opts;
                 opts.char_limit = char_limit;
                 MockGenerator mock(opts);
                 rebuild_summaries(bank, mock);
             },
             py::arg("char_limit") = size_t{1} << 20)
        .def("persist", &MemoryBank::persist)
        .def_static("load", &MemoryBank::load)
        .def("serialize", &MemoryBank::serialize)
        .def_static("parse", &MemoryBank::parse)
        .def("clips",
             [](const MemoryBank& bank) {
                 py::list out;
                 for (const ClipEntry& clip : bank.clips()) out.append(clip_to_dict(clip));
                 return out;
             })
        .def_property_readonly("has_stale", &MemoryBank::has_stale)
        .def_property_readonly("n_hour_nodes",
                               [](const MemoryBank& b) { return b.hour_nodes().size(); })
        .def_property_readonly("n_day_nodes",
                               [](const MemoryBank& b) { return b.day_nodes().size(); })
        .def("__eq__", [](const MemoryBank& a, const MemoryBank& b) { return a == b; })
        .def("__len__", &MemoryBank::size);

    m.def("tokenize",
          [](const std::string& text, bool stopwords) {
              return stopwords ? tokenize(text, StopwordList::english_v1()) : tokenize(text);
          },
          py::arg("text"), py::arg("stopwords") = true);

    m.def("extract_keywords",
          [](const std::string& question) { return extract_keywords(question).keywords; });

    m.def("score_feature", [](const std::vector<double>& a, const std::vector<double>& b) {
        return score_feature(a, b);
    });

    m.def("score_text", [](const std::vector<std::string>& corpus, const std::string& a,
                           const std::string& b) {
        const LexicalBackend backend = fit_corpus(corpus);
        return backend.score_text(a, b);
    });

    m.def("bucketize", [](int64_t ms) { return to_string(bucketize(ms)); });

    m.def("retrieve",
          [](const MemoryBank& bank, const std::string& question, int day, int ms, double lam,
             int top_k, int days_to_expand, int hours_to_expand, double fallback_threshold,
             bool causal, bool keywords) {
              Query query = Query::make(question, Timestamp{day, ms});
              if (keywords) query.keywords = extract_keywords(question).keywords;
              const LexicalBackend backend = backend_for(bank);
              const auto cfg = config_from(lam, top_k, days_to_expand, hours_to_expand,
                                           fallback_threshold, causal);
              return result_to_dict(retrieve(bank, query, cfg, backend), bank);
          },
          py::arg("bank"), py::arg("question"), py::arg("day"), py::arg("ms"),
          py::arg("lambda_") = 0.0, py::arg("top_k") = 3, py::arg("days_to_expand") = 1,
          py::arg("hours_to_expand") = 2, py::arg("fallback_threshold") = 0.05,
          py::arg("causal") = true, py::arg("keywords") = true);

    m.def("retrieve_oracle",
          [](const MemoryBank& bank, const std::string& question, int day, int ms, double lam,
             int top_k, bool causal, bool keywords) {
              Query query = Query::make(question, Timestamp{day, ms});
              if (keywords) query.keywords = extract_keywords(question).keywords;
              const LexicalBackend backend = backend_for(bank);
              RetrievalConfig cfg;
              cfg.lambda = lam;
              cfg.top_k = top_k;
              cfg.causal = causal;
              return result_to_dict(retrieve_oracle(bank, query, cfg, backend), bank);
          },
          py::arg("bank"), py::arg("question"), py::arg("day"), py::arg("ms"),
          py::arg("lambda_") = 0.0, py::arg("top_k") = 3, py::arg("causal") = true,
          py::arg("keywords") = true);

    m.def("generate_synthetic",
          [](uint64_t seed, int days, int participants, int facts, int clips_per_hour,
             int active_hours, std::optional<std::map<std::string, double>> mix,
             size_t feature_dim) {
              SynthSpec spec;
              spec.seed = seed;
              spec.days = days;
              spec.participants = participants;
              spec.planted_facts = facts;
              spec.clips_per_hour = clips_per_hour;
              spec.active_hours_per_day = active_hours;
              spec.feature_dim = feature_dim;
              if (mix) {
                  spec.certificate_mix.clear();
                  for (const auto& [label, fraction] : *mix) {
                      spec.certificate_mix[cert_bucket_from_string(label)] = fraction;
                  }
              }
              SynthResult result = generate(spec);
              py::list qa, planted;
              for (const QaItem& item : result.qa_items) qa.append(qa_to_dict(item));
              for (const PlantedFact& fact : result.facts) planted.append(fact_to_dict(fact));
              return py::make_tuple(std::move(result.bank), qa, planted);
          },
          py::arg("seed") = 1, py::arg("days") = 7, py::arg("participants") = 6,
          py::arg("facts") = 0, py::arg("clips_per_hour") = 120, py::arg("active_hours") = 8,
          py::arg("mix") = py::none(), py::arg("feature_dim") = 0);

    m.def("verify_uniqueness", [](const MemoryBank& bank, const py::list& facts) {
        std::vector<PlantedFact> parsed;
        for (const auto& f : facts) parsed.push_back(fact_from_dict(f.cast<py::dict>()));
        const UniquenessReport report = verify_uniqueness(bank, parsed);
        py::dict d;
        d["facts_checked"] = report.facts_checked;
        d["captions_scanned"] = report.captions_scanned;
        return d;
    });

    m.def("run_eval",
          [](const MemoryBank& bank, const py::list& qa_items, const std::string& mode,
             const std::string& client, std::optional<py::list> facts, double lam, int top_k,
             int threads, uint64_t guess_seed, size_t char_limit) {
              std::vector<QaItem> items;
              for (const auto& q : qa_items) items.push_back(qa_from_dict(q.cast<py::dict>()));

              EvalOptions options;
              options.mode = mode == "segment" ? EvalMode::segment_baseline : EvalMode::rag;
              options.retrieval.lambda = lam;
              options.retrieval.top_k = top_k;
              options.threads = threads;
              options.guess_seed = guess_seed;

              std::unique_ptr<GeneratorClient> generator;
              if (client == "mock") {
                  MockGenerator::Options opts;
                  opts.char_limit = char_limit;
                  generator = std::make_unique<MockGenerator>(opts);
              } else if (client == "scripted") {
                  if (!facts) throw Error("run_eval: client='scripted' requires facts");
                  std::vector<PlantedFact> parsed;
                  for (const auto& f : *facts) parsed.push_back(fact_from_dict(f.cast<py::dict>()));
                  generator = std::make_unique<ScriptedEvidenceClient>(parsed, items, guess_seed);
              } else {
                  throw Error("run_eval: unknown client '" + client + "'");
              }

              const LexicalBackend backend = backend_for(bank);
              const EvalReport report = run_eval(bank, items, options, backend, *generator);

              py::dict d;
              d["average"] = report.average;
              d["n_items"] = report.n_items;
              d["n_correct"] = report.n_correct;
              d["n_guessed"] = report.n_guessed;
              py::dict per_type, per_bucket;
              for (const auto& [name, acc] : report.per_type_accuracy) {
                  per_type[py::str(name)] = acc;
              }
              for (const auto& [label, acc] : report.per_bucket_accuracy) {
                  per_bucket[py::str(label)] = acc;
              }
              d["per_type"] = per_type;
              d["per_bucket"] = per_bucket;
              d["json"] = report.to_json();
              d["table"] = report.to_table();
              return d;
          },
          py::arg("bank"), py::arg("qa_items"), py::arg("mode") = "rag",
          py::arg("client") = "mock", py::arg("facts") = py::none(), py::arg("lambda_") = 0.0,
          py::arg("top_k") = 3, py::arg("threads") = 1, py::arg("guess_seed") = 20250,
          py::arg("char_limit") = size_t{1} << 20);

    m.def("load_qa", [](const std::string& path) {
        const QaLoadResult result = load_qa(path);
        py::list items, issues;
        for (const QaItem& item : result.items) items.append(qa_to_dict(item));
        for (const QaLoadIssue& issue : result.issues) {
            py::dict d;
            d["pointer"] = issue.pointer;
            d["message"] = issue.message;
            issues.append(d);
        }
        return py::make_tuple(items, issues);
    });

    m.def("parse_srt_text", [](const std::string& text) {
        py::list out;
        for (const SrtBlock& block : parse_srt(text)) out.append(block_to_dict(block));
        return out;
    });

    m.def("serialize_srt_blocks", [](const py::list& blocks) {
        std::vector<SrtBlock> parsed;
        for (const auto& b : blocks) parsed.push_back(block_from_dict(b.cast<py::dict>()));
        return serialize_srt(parsed);
    });

    m.def("srt_to_clips",
          [](const py::list& blocks, const std::string& participant, int day, int clip_seconds) {
              std::vector<SrtBlock> parsed;
              for (const auto& b : blocks) parsed.push_back(block_from_dict(b.cast<py::dict>()));
              py::list out;
              for (const ClipEntry& clip : srt_to_clips(parsed, participant, day, clip_seconds)) {
                  out.append(clip_to_dict(clip));
              }
              return out;
          },
          py::arg("blocks"), py::arg("participant"), py::arg("day"), py::arg("clip_seconds") = 30);

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
