// lifelog: ingest, summarize, query, evaluate and synthesize week-scale
// captioned life-logs from the command line.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>

#include "lifelog/app_config.hpp"
#include "lifelog/errors.hpp"
#include "lifelog/evaluation.hpp"
#include "lifelog/generation.hpp"
#include "lifelog/memory_bank.hpp"
#include "lifelog/qa.hpp"
#include "lifelog/retrieval.hpp"
#include "lifelog/similarity.hpp"
#include "lifelog/srt.hpp"
#include "lifelog/synthlog.hpp"

namespace {

using namespace lifelog;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTransport = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// "..._day3.srt", "p01-d3.srt" and similar; the day index must be
/// somewhere in the file name unless --day is given.
std::optional<int> infer_day_from_filename(const std::string& path) {
    const std::string name = std::filesystem::path(path).filename().string();
    static const std::regex pattern(R"((?:^|[_\-.])(?:day|d)(\d{1,3})(?:[_\-.]|$))",
                                    std::regex::icase);
    std::smatch match;
    if (std::regex_search(name, match, pattern)) return std::stoi(match[1].str());
    return std::nullopt;
}

MemoryBank load_bank_or_fail(const std::string& path) {
    if (path.empty()) {
        throw ConfigError("no bank file configured (use --bank, LIFELOG_BANK or a config file)");
    }
    return MemoryBank::load(path);
}

std::unique_ptr<GeneratorClient> make_client(const std::string& which, const AppSettings& settings,
                                             const std::string& facts_path,
                                             const std::string& qa_path, uint64_t seed) {
    if (which == "mock") {
        MockGenerator::Options opts;
        opts.char_limit = settings.mock_char_limit;
        return std::make_unique<MockGenerator>(opts);
    }
    if (which == "live") {
        if (settings.gen_url.empty()) {
            throw ConfigError("--client live requires a generator URL "
                              "(--gen-url, LIFELOG_GEN_URL or config)");
        }
        HttpGeneratorClient::Config cfg;
        cfg.base_url = settings.gen_url;
        cfg.api_key = settings.gen_key;
        cfg.model_name = settings.gen_model;
        return std::make_unique<HttpGeneratorClient>(cfg);
    }
    if (which == "scripted") {
        if (facts_path.empty()) throw ConfigError("--client scripted requires --facts");
        auto facts = load_facts(facts_path);
        auto qa = load_qa(qa_path);
        return std::make_unique<ScriptedEvidenceClient>(facts, qa.items, seed);
    }
    throw ConfigError("unknown client '" + which + "' (expected mock, scripted or live)");
}

std::map<CertBucket, double> parse_mix(const std::string& text) {
    std::map<CertBucket, double> mix;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        const size_t eq = part.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("bad --mix entry '" + part + "', expected LABEL=FRACTION");
        }
        mix[cert_bucket_from_string(part.substr(0, eq))] = std::stod(part.substr(eq + 1));
    }
    return mix;
}

struct GlobalArgs {
    std::string bank;
    std::string config_file;
    std::string gen_url, gen_key, gen_model;
    std::string log_level;
    double lambda = 0.0;
    int top_k = 0;
    int days_to_expand = 0, hours_to_expand = 0;
    double fallback_threshold = 0.0;
    bool no_causal = false;
    int mock_char_limit = 0;
};

AppSettings resolve_settings(const CLI::App& app, const GlobalArgs& args) {
    ConfigLayer flags;
    auto set_if = [&](const std::string& name, const std::string& key, const std::string& value) {
        if (app.count(name) > 0) flags[key] = value;
    };
    set_if("--bank", "bank", args.bank);
    set_if("--gen-url", "gen_url", args.gen_url);
    set_if("--gen-key", "gen_key", args.gen_key);
    set_if("--gen-model", "gen_model", args.gen_model);
    set_if("--log-level", "log_level", args.log_level);
    set_if("--lambda", "lambda", std::to_string(args.lambda));
    set_if("--k", "top_k", std::to_string(args.top_k));
    set_if("--days-to-expand", "days_to_expand", std::to_string(args.days_to_expand));
    set_if("--hours-to-expand", "hours_to_expand", std::to_string(args.hours_to_expand));
    set_if("--fallback-threshold", "fallback_threshold", std::to_string(args.fallback_threshold));
    if (app.count("--no-causal") > 0) flags["causal"] = "false";
    set_if("--mock-char-limit", "mock_char_limit", std::to_string(args.mock_char_limit));

    ConfigLayer file;
    if (!args.config_file.empty()) file = parse_config_file(args.config_file);
    return AppSettings::resolve_with_process_env(flags, file);
}

LexicalBackend fit_backend(const MemoryBank& bank) {
    std::vector<std::string> captions;
    captions.reserve(bank.size());
    for (const ClipEntry& clip : bank.clips()) captions.push_back(clip.caption_text);
    if (captions.empty()) captions.push_back("empty");  // vacuous corpus for empty banks
    return fit_corpus(captions);
}

// ---------------------------------------------------------------------------

int cmd_ingest(const AppSettings& settings, const std::vector<std::string>& files,
               const std::string& participant, int day_flag, int clip_seconds) {
    MemoryBank bank = [&] {
        if (!settings.bank_path.empty() && std::filesystem::exists(settings.bank_path)) {
            return MemoryBank::load(settings.bank_path);
        }
        BankConfig cfg;
        cfg.clip_seconds = clip_seconds;
        return MemoryBank(cfg);
    }();
    if (settings.bank_path.empty()) {
        throw ConfigError("no bank file configured (use --bank, LIFELOG_BANK or a config file)");
    }

    size_t added = 0;
    for (const std::string& file : files) {
        int day = day_flag;
        if (day <= 0) {
            auto inferred = infer_day_from_filename(file);
            if (!inferred) {
                throw ConfigError("cannot infer the day index from '" + file +
                                  "'; pass --day or name the file like captions_day3.srt");
            }
            day = *inferred;
        }
        const auto blocks = parse_srt(read_file(file));
        for (ClipEntry& clip : srt_to_clips(blocks, participant, day,
                                            bank.config().clip_seconds)) {
            bank.add_clip(std::move(clip));
            ++added;
        }
        std::cerr << "ingested " << blocks.size() << " block(s) from " << file << " (day " << day
                  << ")\n";
    }
    bank.persist(settings.bank_path);
    std::cout << "bank: " << bank.size() << " clip(s) (" << added << " new), "
              << bank.stale_windows().size() << " stale window(s)\n";
    return kExitOk;
}

int cmd_summarize(const AppSettings& settings, const std::string& client_kind) {
    MemoryBank bank = load_bank_or_fail(settings.bank_path);
    auto client = make_client(client_kind, settings, "", "", 0);
    const size_t stale_before = bank.stale_windows().size();
    try {
        rebuild_summaries(bank, *client);
    } catch (const GeneratorError& e) {
        bank.persist(settings.bank_path);  // keep the windows that did build
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    }
    bank.persist(settings.bank_path);
    std::cout << "summarized " << stale_before << " stale window(s); " << bank.hour_nodes().size()
              << " hour node(s), " << bank.day_nodes().size() << " day node(s)\n";
    return kExitOk;
}

int cmd_query(const AppSettings& settings, const std::string& question, const std::string& at,
              const std::string& choices_text, bool trace, const std::string& client_kind) {
    MemoryBank bank = load_bank_or_fail(settings.bank_path);
    Query query = Query::make(question, Timestamp::parse(at));
    query.keywords = extract_keywords(question).keywords;

    const LexicalBackend backend = fit_backend(bank);
    RetrievalResult result = retrieve(bank, query, settings.retrieval, backend);

    std::cout << "mode: " << to_string(result.mode) << "\n";
    std::cout << "evidence (" << result.evidence.size() << "):\n";
    size_t rank = 1;
    for (const ScoredClip& sc : result.evidence) {
        const ClipEntry* clip = bank.find_clip(sc.clip_id);
        std::cout << "  " << rank++ << ". [" << clip->range.start.to_string() << " - "
                  << clip->range.end.to_string() << "] (score " << sc.score << ") " << sc.clip_id
                  << ": " << clip->caption_text << "\n";
    }
    if (trace) std::cout << "trace: " << result.to_json() << "\n";

    auto client = make_client(client_kind, settings, "", "", 0);
    if (!choices_text.empty()) {
        std::array<std::string, 4> choices;
        std::istringstream in(choices_text);
        std::string part;
        size_t n = 0;
        while (std::getline(in, part, '|')) {
            if (n >= 4) throw ConfigError("--choices expects exactly 4 entries separated by '|'");
            choices[n++] = part;
        }
        if (n != 4) throw ConfigError("--choices expects exactly 4 entries separated by '|'");
        McqAnswer answer = answer_mcq(query, choices, result, bank, *client);
        std::cout << "answer: " << static_cast<char>('A' + answer.choice_index) << " ("
                  << choices[answer.choice_index] << ")\n";
    } else {
        std::cout << "answer: " << answer_freeform(query, result, bank, *client) << "\n";
    }
    return kExitOk;
}

int cmd_eval(const AppSettings& settings, const std::string& qa_path, const std::string& mode_text,
             const std::string& report_path, const std::string& report_text_path,
             const std::string& client_kind, const std::string& facts_path, int threads,
             uint64_t seed) {
    MemoryBank bank = load_bank_or_fail(settings.bank_path);
    QaLoadResult qa = load_qa(qa_path);
    for (const QaLoadIssue& issue : qa.issues) {
        std::cerr << "schema issue at " << issue.pointer << ": " << issue.message << "\n";
    }

    EvalOptions options;
    if (mode_text == "rag") {
        options.mode = EvalMode::rag;
    } else if (mode_text == "segment") {
        options.mode = EvalMode::segment_baseline;
    } else {
        throw ConfigError("unknown --mode '" + mode_text + "' (expected rag or segment)");
    }
    options.retrieval = settings.retrieval;
    options.threads = threads;
    options.guess_seed = seed;

    if (options.mode == EvalMode::rag && bank.has_stale()) {
        throw Error("bank has stale summary windows; run 'lifelog summarize' first");
    }

    auto client = make_client(client_kind, settings, facts_path, qa_path, seed);
    const LexicalBackend backend = fit_backend(bank);
    EvalReport report = run_eval(bank, qa.items, options, backend, *client);

    std::cout << report.to_table();
    if (!report_path.empty()) write_file(report_path, report.to_json());
    if (!report_text_path.empty()) write_file(report_text_path, report.to_table());
    return qa.issues.empty() ? kExitOk : kExitValidation;
}

int cmd_synth(uint64_t seed, int days, int participants, int facts, int clips_per_hour,
              int active_hours, const std::string& mix_text, size_t feature_dim,
              const std::string& out_path, const std::string& qa_out, const std::string& facts_out,
              bool summarize_now, size_t mock_char_limit) {
    SynthSpec spec;
    spec.seed = seed;
    spec.days = days;
    spec.participants = participants;
    spec.planted_facts = facts;
    spec.clips_per_hour = clips_per_hour;
    spec.active_hours_per_day = active_hours;
    spec.feature_dim = feature_dim;
    if (!mix_text.empty()) spec.certificate_mix = parse_mix(mix_text);

    SynthResult result = generate(spec);
    verify_uniqueness(result.bank, result.facts);
    if (summarize_now) {
        MockGenerator::Options opts;
        opts.char_limit = mock_char_limit;
        MockGenerator mock(opts);
        rebuild_summaries(result.bank, mock);
    }
    result.bank.persist(out_path);
    if (!qa_out.empty()) write_file(qa_out, serialize_qa(result.qa_items));
    if (!facts_out.empty()) write_file(facts_out, serialize_facts(result.facts));
    std::cout << "bank: " << result.bank.size() << " clip(s), " << result.qa_items.size()
              << " QA item(s), " << result.facts.size() << " fact(s)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval-augmented question answering over timestamped caption streams"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--bank", g.bank, "memory-bank file (env LIFELOG_BANK)");
    app.add_option("--config", g.config_file, "key = value config file");
    app.add_option("--gen-url", g.gen_url, "generator endpoint (env LIFELOG_GEN_URL)");
    app.add_option("--gen-key", g.gen_key, "generator API key (env LIFELOG_GEN_KEY)");
    app.add_option("--gen-model", g.gen_model, "generator model name");
    app.add_option("--log-level", g.log_level, "quiet|info|debug");
    app.add_option("--lambda", g.lambda, "textual-channel weight in the clip score");
    app.add_option("--k", g.top_k, "clips to retrieve");
    app.add_option("--days-to-expand", g.days_to_expand, "days kept in coarse search");
    app.add_option("--hours-to-expand", g.hours_to_expand, "hour windows kept after refinement");
    app.add_option("--fallback-threshold", g.fallback_threshold,
                   "day-score floor below which the search goes global");
    app.add_flag("--no-causal", g.no_causal, "allow evidence after the question time");
    app.add_option("--mock-char-limit", g.mock_char_limit, "mock summarizer truncation length");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse annotation SRT files into the bank");
    std::vector<std::string> srt_files;
    std::string participant;
    int day = 0, clip_seconds = 30;
    ingest->add_option("files", srt_files, "SRT files")->required()->expected(-1);
    ingest->add_option("--participant", participant, "participant label")->required();
    ingest->add_option("--day", day, "recording day (default: inferred from the file name)");
    ingest->add_option("--clip-seconds", clip_seconds, "clip grid length for new banks");

    // summarize
    auto* summarize = app.add_subcommand("summarize", "rebuild stale hour/day summaries");
    std::string sum_client = "mock";
    summarize->add_option("--client", sum_client, "mock|live");
    bool sum_mock = false, sum_live = false;
    summarize->add_flag("--mock", sum_mock, "use the deterministic mock generator");
    summarize->add_flag("--live", sum_live, "use the configured HTTP generator");

    // query
    auto* query_cmd = app.add_subcommand("query", "retrieve evidence and answer a question");
    std::string question, at_text, choices_text, query_client = "mock";
    bool trace = false;
    query_cmd->add_option("question", question, "question text")->required();
    query_cmd->add_option("--at", at_text, "question time DAY:HH:MM:SS[.mmm]")->required();
    query_cmd->add_option("--choices", choices_text, "4 choices separated by '|' (MCQ mode)");
    query_cmd->add_flag("--trace", trace, "print the search trace as JSON");
    query_cmd->add_option("--client", query_client, "mock|live");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "run a QA set through the pipeline");
    std::string qa_path, eval_mode = "rag", report_path, report_text_path;
    std::string eval_client = "mock", facts_path;
    int threads = 1;
    uint64_t guess_seed = 20250;
    eval_cmd->add_option("--qa", qa_path, "QA JSON file")->required();
    eval_cmd->add_option("--mode", eval_mode, "rag|segment");
    eval_cmd->add_option("--report", report_path, "write the JSON report here");
    eval_cmd->add_option("--report-text", report_text_path, "write the text table here");
    eval_cmd->add_option("--client", eval_client, "mock|scripted|live");
    eval_cmd->add_option("--facts", facts_path, "planted-facts file for --client scripted");
    eval_cmd->add_option("--threads", threads, "bounded parallelism");
    eval_cmd->add_option("--seed", guess_seed, "seed for fallback guesses");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic lifelog with planted facts");
    uint64_t synth_seed = 1;
    int synth_days = 7, synth_participants = 6, synth_facts = 200;
    int synth_cph = 120, synth_active = 8;
    size_t synth_feature_dim = 0;
    std::string mix_text, synth_out, synth_qa_out, synth_facts_out;
    bool synth_summarize = false;
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--days", synth_days, "days in the timeline");
    synth->add_option("--participants", synth_participants, "participant count");
    synth->add_option("--facts", synth_facts, "planted facts / QA items");
    synth->add_option("--clips-per-hour", synth_cph, "clips per active hour");
    synth->add_option("--active-hours", synth_active, "active hours per day");
    synth->add_option("--mix", mix_text,
                      "certificate mix, e.g. '<2h=0.25,2h-6h=0.25,6h-24h=0.25,>24h=0.25'");
    synth->add_option("--feature-dim", synth_feature_dim, "attach random unit feature vectors");
    synth->add_option("--out", synth_out, "bank file to write")->required();
    synth->add_option("--qa-out", synth_qa_out, "QA JSON to write");
    synth->add_option("--facts-out", synth_facts_out, "facts JSON to write");
    synth->add_flag("--summarize", synth_summarize, "build mock summaries before writing");

    CLI11_PARSE(app, argc, argv);

    try {
        const AppSettings settings = resolve_settings(app, g);
        if (ingest->parsed()) {
            return cmd_ingest(settings, srt_files, participant, day, clip_seconds);
        }
        if (summarize->parsed()) {
            std::string kind = sum_live ? "live" : (sum_mock ? "mock" : sum_client);
            return cmd_summarize(settings, kind);
        }
        if (query_cmd->parsed()) {
            return cmd_query(settings, question, at_text, choices_text, trace, query_client);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(settings, qa_path, eval_mode, report_path, report_text_path,
                            eval_client, facts_path, threads, guess_seed);
        }
        if (synth->parsed()) {
            const AppSettings s = settings;
            return cmd_synth(synth_seed, synth_days, synth_participants, synth_facts, synth_cph,
                             synth_active, mix_text, synth_feature_dim, synth_out, synth_qa_out,
                             synth_facts_out, synth_summarize, s.mock_char_limit);
        }
    } catch (const GeneratorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
