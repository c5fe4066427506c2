#include "cbs/cli.hpp"

#include "cbs/analytics.hpp"
#include "cbs/batch_io.hpp"
#include "cbs/box_fusion.hpp"
#include "cbs/curation.hpp"
#include "cbs/dedup.hpp"
#include "cbs/error.hpp"
#include "cbs/log.hpp"
#include "cbs/manifest.hpp"
#include "cbs/normalize.hpp"
#include "cbs/strategies.hpp"
#include "cbs/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace cbs::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

/// Usage problems detected after flag parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string("missing required ") + flag);
    if (!fs::exists(path)) throw UsageError(std::string(flag) + ": no such file '" + path + "'");
}

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output " + path.string());
    return out;
}

void write_json(const fs::path& path, const ojson& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed to write " + path.string());
}

std::vector<SampleAnnotation> load_annotations(const std::string& path, const ConceptVocabulary& vocab) {
    AnnotationReader reader(path, vocab);
    auto samples = read_all(reader);
    if (!reader.issues().empty())
        log().warn("{}: {} ingest issue(s); first at line {}: {}", path, reader.issues().size(),
                   reader.issues().front().line, reader.issues().front().message);
    return samples;
}

std::vector<std::pair<std::string, std::uint64_t>> ranked_rows(const std::map<ConceptId, std::uint64_t>& counts,
                                                                const ConceptVocabulary& vocab) {
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (const auto& [id, n] : counts) rows.emplace_back(vocab.name(id), n);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
}

template <typename Map>
std::vector<std::pair<std::string, std::uint64_t>> keyed_rows(const Map& hist) {
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (const auto& [k, n] : hist) rows.emplace_back(std::to_string(k), n);
    return rows;
}

void write_csv(const std::string& path, std::string_view key, const std::vector<std::pair<std::string, std::uint64_t>>& rows) {
    if (path.empty()) return;
    auto out = open_output(path);
    write_histogram_csv(out, key, rows);
    if (!out) throw IoError("failed to write " + path);
}

std::vector<double> parse_taus(const std::string& text) {
    std::vector<double> taus;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            taus.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--taus: bad value '" + item + "'");
        }
    }
    if (taus.empty()) throw UsageError("--taus: no thresholds given");
    return taus;
}

struct SampleOptions {
    std::string data, vocab, out, strategy = "dm";
    std::size_t superbatch_size = 20480;
    double filter_ratio = 0.8;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    std::size_t shuffle_buffer = 0;
    std::uint32_t max_concept_frequency = 40;
    std::uint32_t min_samples_concept = 1;
};

struct AnalyzeOptions {
    std::string what, data, vocab, indices, out, csv, field = "caption", taus = "0.6,0.7,0.8";
};

struct FuseOptions {
    std::string in, out, mode = "clip", config;
    double iou_threshold = 0.29;
    double post_threshold = 0.5;
    std::size_t n_sources = 4;
    bool no_post_filter = false;
};

struct CurateOptions {
    std::string data, vocab, out, report;
    std::uint64_t threshold = 70000;
    std::uint64_t seed = 0;
};

struct BuildVocabOptions {
    std::string in, out, embeddings, plural_exceptions, merges;
    double similarity = 0.95;
};

struct SynthOptions {
    std::string out_data, out_vocab;
    std::size_t samples = 100000;
    std::size_t concepts = 2000;
    double exponent = 1.2;
    double extra_mean = 2.0;
    std::uint64_t seed = 0;
    bool captions = false;
};

int cmd_sample(const SampleOptions& o, std::size_t threads, RunManifest manifest, std::ostream& out) {
    require_file(o.data, "--data");
    require_file(o.vocab, "--vocab");
    if (o.out.empty()) throw UsageError("missing required --out");

    DmParams params;
    params.max_concept_frequency = o.max_concept_frequency;
    params.min_samples_concept = o.min_samples_concept;
    params.validate();
    const auto strategy = make_strategy(o.strategy, params);

    SamplerConfig config;
    config.superbatch_size = o.superbatch_size;
    config.filter_ratio = o.filter_ratio;
    config.epochs = o.epochs;
    config.seed = o.seed;
    config.shuffle_buffer = o.shuffle_buffer;
    config.prefetch = threads > 1;
    config.validate();

    const auto vocab = ConceptVocabulary::load(o.vocab);
    AnnotationReader reader(o.data, vocab);

    auto file = open_output(o.out);
    StreamBatchSink sink(file, {config.superbatch_size, config.filter_ratio, config.seed});
    const auto summary = run_sampler(reader, config, *strategy, sink);
    file.close();
    if (!file) throw IoError("failed to close " + o.out);

    manifest.add_input(o.data);
    manifest.add_input(o.vocab);
    manifest.config = {{"command", "sample"},
                       {"strategy", std::string(strategy->name())},
                       {"superbatch_size", config.superbatch_size},
                       {"filter_ratio", config.filter_ratio},
                       {"sub_batch_size", config.sub_batch_size()},
                       {"epochs", config.epochs},
                       {"seed", config.seed},
                       {"shuffle_buffer", config.shuffle_buffer},
                       {"max_concept_frequency", params.max_concept_frequency},
                       {"min_samples_concept", params.min_samples_concept}};
    manifest.config["results"] = {{"superbatches", summary.superbatches},
                                  {"samples_seen", summary.samples_seen},
                                  {"samples_selected", summary.samples_selected},
                                  {"selected_per_epoch", summary.selected_per_epoch},
                                  {"ingest_issues", reader.issues().size()}};
    manifest.write(manifest_path(o.out));

    out << "superbatches=" << summary.superbatches << " selected=" << summary.samples_selected
        << " seen=" << summary.samples_seen << " wall_s=" << summary.wall_seconds << '\n';
    return 0;
}

int cmd_analyze(const AnalyzeOptions& o, RunManifest manifest, std::ostream& out) {
    require_file(o.data, "--data");
    require_file(o.vocab, "--vocab");
    if (o.out.empty()) throw UsageError("missing required --out");
    const auto vocab = ConceptVocabulary::load(o.vocab);
    manifest.add_input(o.data);
    manifest.add_input(o.vocab);
    manifest.config = {{"command", "analyze"}, {"what", o.what}};

    ojson report;
    if (o.what == "batch") {
        require_file(o.indices, "--indices");
        manifest.add_input(o.indices);
        const auto samples = load_annotations(o.data, vocab);
        std::ifstream in(o.indices, std::ios::binary);
        const auto batches = read_batch_file(in);

        auto rows = ojson::array();
        std::map<ConceptId, std::uint64_t> total;
        double unique_sum = 0.0, entropy_sum = 0.0;
        for (const auto& b : batches.batches) {
            CompositionBuilder builder;
            for (const auto idx : b.indices) {
                if (idx >= samples.size())
                    throw DataError("batch index " + std::to_string(idx) + " beyond the annotation stream");
                builder.add(samples[idx]);
            }
            const auto comp = builder.finish();
            for (const auto& [id, n] : comp.concept_histogram) total[id] += n;
            unique_sum += static_cast<double>(comp.unique_concepts);
            entropy_sum += comp.entropy;
            ojson row = {{"epoch", b.epoch}, {"batch_seq", b.batch_seq}, {"strategy", b.strategy}};
            row["composition"] = to_json(comp, vocab);
            rows.push_back(std::move(row));
        }
        const double n = batches.batches.empty() ? 1.0 : static_cast<double>(batches.batches.size());
        report["batches"] = std::move(rows);
        report["summary"] = {{"batches", batches.batches.size()},
                             {"mean_unique_concepts", unique_sum / n},
                             {"mean_entropy", entropy_sum / n}};
        write_csv(o.csv, "concept", ranked_rows(total, vocab));
    } else if (o.what == "dataset") {
        AnnotationReader reader(o.data, vocab);
        const auto profile = dataset_profile(reader);
        report = to_json(profile, vocab);
        write_csv(o.csv, "multiplicity", keyed_rows(profile.multiplicity_histogram));
    } else if (o.what == "adherence") {
        const auto field = parse_caption_field(o.field);
        const auto taus = parse_taus(o.taus);
        manifest.config["field"] = o.field;
        manifest.config["taus"] = taus;
        const auto samples = load_annotations(o.data, vocab);
        report = to_json(concept_adherence(samples, vocab, field, taus));
    } else if (o.what == "words") {
        const auto field = parse_caption_field(o.field);
        manifest.config["field"] = o.field;
        const auto samples = load_annotations(o.data, vocab);
        const auto stats = word_count_stats(samples, field);
        report = to_json(stats);
        write_csv(o.csv, "words", keyed_rows(stats.histogram));
    } else {
        throw UsageError("--what must be one of batch, dataset, adherence, words");
    }
    write_json(o.out, report);
    manifest.write(manifest_path(o.out));
    out << "wrote " << o.out << '\n';
    return 0;
}

int cmd_fuse(const FuseOptions& o, RunManifest manifest, std::ostream& out) {
    require_file(o.in, "--in");
    if (o.out.empty()) throw UsageError("missing required --out");
    WbfConfig config;
    config.iou_threshold = o.iou_threshold;
    config.post_threshold = o.post_threshold;
    config.rescale_mode = parse_rescale_mode(o.mode);
    config.n_sources = o.n_sources;
    config.post_filter = !o.no_post_filter;
    config.validate();

    std::map<int, double> resolution_weights;
    if (!o.config.empty()) {
        require_file(o.config, "--config");
        manifest.add_input(o.config);
        std::ifstream cin(o.config);
        const auto doc = nlohmann::json::parse(cin, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) throw DataError(o.config + ": not a JSON object");
        if (const auto it = doc.find("resolution_weights"); it != doc.end()) {
            for (const auto& [res, w] : it->items()) resolution_weights[std::stoi(res)] = w.get<double>();
        }
    }

    manifest.add_input(o.in);
    std::ifstream in(o.in, std::ios::binary);
    auto file = open_output(o.out);
    std::string line;
    std::size_t line_no = 0, images = 0, fused_total = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto doc = nlohmann::json::parse(line, nullptr, false);
        const auto where = o.in + ":" + std::to_string(line_no) + ": ";
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("id") || !doc.contains("detections"))
            throw DataError(where + "expected {\"id\", \"detections\"}");

        // Class names are interned per image in order of first appearance.
        std::vector<std::string> classes;
        std::map<int, DetectionSet> by_res;
        for (const auto& d : doc["detections"]) {
            const auto& cls = d.at("class").get_ref<const std::string&>();
            auto pos = std::find(classes.begin(), classes.end(), cls);
            if (pos == classes.end()) pos = classes.insert(classes.end(), cls);
            const auto box = d.at("box").get<std::vector<double>>();
            if (box.size() != 4) throw DataError(where + "box must have 4 coordinates");
            const int res = d.at("res").get<int>();
            auto& set = by_res[res];
            set.resolution_id = res;
            if (const auto w = resolution_weights.find(res); w != resolution_weights.end()) set.resolution_weight = w->second;
            set.boxes.push_back({box[0], box[1], box[2], box[3],
                                 ConceptId(static_cast<std::uint32_t>(pos - classes.begin())), d.at("score").get<double>()});
        }
        std::vector<DetectionSet> sets;
        for (auto& [res, set] : by_res) sets.push_back(std::move(set));
        const auto fused = wbf(sets, config);

        ojson rec;
        rec["id"] = doc["id"];
        auto& dets = rec["detections"] = ojson::array();
        for (const auto& f : fused) {
            dets.push_back({{"box", {f.box.x1, f.box.y1, f.box.x2, f.box.y2}},
                            {"class", classes[f.box.concept_id.value]},
                            {"score", f.box.score},
                            {"cluster_size", f.cluster_size},
                            {"n_resolutions", f.n_resolutions}});
        }
        file << rec.dump() << '\n';
        ++images;
        fused_total += fused.size();
    }
    file.close();
    if (!file) throw IoError("failed to write " + o.out);

    manifest.config = {{"command", "fuse-boxes"},
                       {"iou_threshold", config.iou_threshold},
                       {"post_threshold", config.post_threshold},
                       {"mode", o.mode},
                       {"n_sources", config.n_sources},
                       {"post_filter", config.post_filter}};
    manifest.config["results"] = {{"images", images}, {"fused_detections", fused_total}};
    manifest.write(manifest_path(o.out));
    out << "images=" << images << " fused=" << fused_total << '\n';
    return 0;
}

int cmd_curate(const CurateOptions& o, RunManifest manifest, std::ostream& out) {
    require_file(o.data, "--data");
    require_file(o.vocab, "--vocab");
    if (o.out.empty()) throw UsageError("missing required --out");
    const auto vocab = ConceptVocabulary::load(o.vocab);
    AnnotationReader reader(o.data, vocab);
    CurationConfig config;
    config.per_concept_threshold = o.threshold;
    config.seed = o.seed;
    const auto result = metaclip_curate(reader, config);

    auto file = open_output(o.out);
    for (const auto& id : result.kept_ids) file << id << '\n';
    file.close();
    if (!file) throw IoError("failed to write " + o.out);

    const auto& r = result.report;
    ojson report;
    report["input_samples"] = r.input_samples;
    report["kept"] = r.kept;
    report["dropped_unannotated"] = r.dropped_unannotated;
    report["threshold"] = o.threshold;
    auto rows = ojson::array();
    for (const auto& [id, before] : r.before) {
        const auto it = r.after.find(id);
        rows.push_back({{"concept", vocab.name(id)}, {"before", before}, {"after", it == r.after.end() ? 0 : it->second}});
    }
    report["per_concept"] = std::move(rows);
    const std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
    write_json(report_path, report);

    manifest.add_input(o.data);
    manifest.add_input(o.vocab);
    manifest.config = {{"command", "curate-metaclip"}, {"threshold", o.threshold}, {"seed", o.seed}};
    manifest.config["results"] = {{"input_samples", r.input_samples}, {"kept", r.kept}};
    manifest.write(manifest_path(o.out));
    out << "kept=" << r.kept << " of " << r.input_samples << '\n';
    return 0;
}

// Raw names in, canonical vocabulary out: normalize, collapse plural forms,
// then optionally merge near-identical embeddings.
int cmd_build_vocab(const BuildVocabOptions& o, RunManifest manifest, std::ostream& out) {
    require_file(o.in, "--in");
    if (o.out.empty()) throw UsageError("missing required --out");
    const PluralRules rules = o.plural_exceptions.empty() ? PluralRules::builtin() : PluralRules::load(o.plural_exceptions);
    manifest.add_input(o.in);

    std::vector<std::string> order;
    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, std::string> raw_to_lemma;
    std::ifstream in(o.in);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        const std::string raw = tab == std::string::npos ? line : line.substr(0, tab);
        const std::uint64_t count = tab == std::string::npos ? 0 : std::stoull(line.substr(tab + 1));
        const auto lemma = rules.lemmatize(normalize_name(raw));
        if (lemma.empty()) continue;
        raw_to_lemma[normalize_name(raw)] = lemma;
        if (!counts.contains(lemma)) order.push_back(lemma);
        counts[lemma] += count;
    }

    std::vector<std::string> survivors = order;
    ojson merges = ojson::array();
    if (!o.embeddings.empty()) {
        require_file(o.embeddings, "--embeddings");
        manifest.add_input(o.embeddings);
        // `<name>\t<v0> <v1> ...`, keyed by any raw spelling of the concept.
        std::map<std::string, EmbeddingVector<double>> by_lemma;
        std::ifstream ein(o.embeddings);
        while (std::getline(ein, line)) {
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) throw DataError(o.embeddings + ": expected <name>\\t<values>");
            std::istringstream values(line.substr(tab + 1));
            std::vector<double> v{std::istream_iterator<double>(values), std::istream_iterator<double>()};
            const auto key = normalize_name(line.substr(0, tab));
            const auto it = raw_to_lemma.find(key);
            const auto lemma = it == raw_to_lemma.end() ? rules.lemmatize(key) : it->second;
            if (!by_lemma.contains(lemma)) by_lemma[lemma] = Eigen::Map<EmbeddingVector<double>>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        std::vector<EmbeddingVector<double>> vectors;
        for (const auto& name : order) {
            const auto it = by_lemma.find(name);
            if (it == by_lemma.end()) throw DataError(o.embeddings + ": no embedding for '" + name + "'");
            vectors.push_back(it->second);
        }
        const auto groups = semantic_dedup<double>(order, std::span<const EmbeddingVector<double>>(vectors), o.similarity);
        survivors.clear();
        std::map<std::string, std::uint64_t> merged;
        for (const auto& g : groups) {
            survivors.push_back(g.survivor);
            auto members = ojson::array();
            for (const auto m : g.members) {
                merged[g.survivor] += counts[order[m]];
                members.push_back(order[m]);
            }
            if (g.members.size() > 1) merges.push_back({{"survivor", g.survivor}, {"members", members}});
        }
        counts = std::move(merged);
    }

    std::vector<VocabularyEntry> entries;
    for (const auto& name : survivors) entries.push_back({name, counts[name]});
    const ConceptVocabulary vocab(std::move(entries));
    auto file = open_output(o.out);
    vocab.write(file);
    file.close();
    if (!file) throw IoError("failed to write " + o.out);
    if (!o.merges.empty()) write_json(o.merges, merges);

    manifest.config = {{"command", "build-vocab"}, {"similarity", o.similarity}, {"semantic", !o.embeddings.empty()}};
    manifest.config["results"] = {{"raw_names", raw_to_lemma.size()}, {"concepts", vocab.size()}};
    manifest.write(manifest_path(o.out));
    out << "concepts=" << vocab.size() << '\n';
    return 0;
}

int cmd_synth(const SynthOptions& o, RunManifest manifest, std::ostream& out) {
    if (o.out_data.empty() || o.out_vocab.empty()) throw UsageError("--out-data and --out-vocab are required");
    ZipfPoolConfig config;
    config.samples = o.samples;
    config.concepts = o.concepts;
    config.exponent = o.exponent;
    config.extra_mean = o.extra_mean;
    config.seed = o.seed;
    config.captions = o.captions;
    const auto vocab = synthetic_vocabulary(config);
    const auto pool = zipf_pool(config);

    auto vfile = open_output(o.out_vocab);
    vocab.write(vfile);
    auto dfile = open_output(o.out_data);
    for (const auto& s : pool) dfile << serialize_annotation(s, vocab) << '\n';
    vfile.close();
    dfile.close();
    if (!vfile || !dfile) throw IoError("failed to write synthetic outputs");

    manifest.config = {{"command", "synth"},     {"samples", o.samples}, {"concepts", o.concepts},
                       {"exponent", o.exponent}, {"extra_mean", o.extra_mean}, {"seed", o.seed},
                       {"captions", o.captions}};
    manifest.write(manifest_path(o.out_data));
    out << "samples=" << pool.size() << " concepts=" << vocab.size() << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concept-aware batch sampling toolkit"};
    app.require_subcommand(1);
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--threads", threads, "Worker threads; 1 disables ingestion prefetch")->check(CLI::PositiveNumber);

    SampleOptions so;
    auto* sample = app.add_subcommand("sample", "Select sub-batches from superbatches and write batch indices");
    sample->add_option("--data", so.data, "Annotation JSONL file")->required();
    sample->add_option("--vocab", so.vocab, "Vocabulary TSV file")->required();
    sample->add_option("--out", so.out, "Batch-index output file")->required();
    sample->add_option("--strategy", so.strategy, "iid, dm, fm or dm-alg2")->capture_default_str();
    sample->add_option("--superbatch-size", so.superbatch_size, "Superbatch size B")->capture_default_str();
    sample->add_option("--filter-ratio", so.filter_ratio, "Filter ratio f in [0,1)")->capture_default_str();
    sample->add_option("--epochs", so.epochs)->capture_default_str();
    sample->add_option("--seed", so.seed)->capture_default_str();
    sample->add_option("--shuffle-buffer", so.shuffle_buffer, "0 keeps file order")->capture_default_str();
    sample->add_option("--max-concept-frequency", so.max_concept_frequency)->capture_default_str();
    sample->add_option("--min-samples-concept", so.min_samples_concept)->capture_default_str();

    AnalyzeOptions ao;
    auto* analyze = app.add_subcommand("analyze", "Composition, dataset and caption statistics");
    analyze->add_option("--what", ao.what, "batch, dataset, adherence or words")
        ->required()
        ->check(CLI::IsMember({"batch", "dataset", "adherence", "words"}));
    analyze->add_option("--data", ao.data)->required();
    analyze->add_option("--vocab", ao.vocab)->required();
    analyze->add_option("--indices", ao.indices, "Batch-index file (--what batch)");
    analyze->add_option("--out", ao.out, "JSON report path")->required();
    analyze->add_option("--csv", ao.csv, "Optional histogram CSV path");
    analyze->add_option("--field", ao.field, "caption or recaption")->capture_default_str();
    analyze->add_option("--taus", ao.taus, "Comma-separated partial-match thresholds")->capture_default_str();

    AnalyzeOptions po;
    auto* profile = app.add_subcommand("profile", "Dataset-wide concept counts (same as analyze --what dataset)");
    profile->add_option("--data", po.data)->required();
    profile->add_option("--vocab", po.vocab)->required();
    profile->add_option("--out", po.out)->required();
    profile->add_option("--csv", po.csv);

    FuseOptions fo;
    auto* fuse_cmd = app.add_subcommand("fuse-boxes", "Weighted box fusion across resolutions");
    fuse_cmd->add_option("--in", fo.in, "Detection JSONL")->required();
    fuse_cmd->add_option("--out", fo.out, "Fused JSONL")->required();
    fuse_cmd->add_option("--iou-threshold", fo.iou_threshold)->capture_default_str();
    fuse_cmd->add_option("--post-threshold", fo.post_threshold)->capture_default_str();
    fuse_cmd->add_option("--mode", fo.mode, "clip or linear")->capture_default_str();
    fuse_cmd->add_option("--n-sources", fo.n_sources)->capture_default_str();
    fuse_cmd->add_flag("--no-post-filter", fo.no_post_filter);
    fuse_cmd->add_option("--config", fo.config, "JSON with resolution_weights overrides");

    CurateOptions co;
    auto* curate = app.add_subcommand("curate-metaclip", "Offline per-concept balanced subsampling");
    curate->add_option("--data", co.data)->required();
    curate->add_option("--vocab", co.vocab)->required();
    curate->add_option("--out", co.out, "Kept sample ids, one per line")->required();
    curate->add_option("--report", co.report, "Report JSON (default <out>.report.json)");
    curate->add_option("--threshold", co.threshold, "Per-concept threshold")->capture_default_str();
    curate->add_option("--seed", co.seed)->capture_default_str();

    BuildVocabOptions bo;
    auto* build = app.add_subcommand("build-vocab", "Normalize and deduplicate raw concept names");
    build->add_option("--in", bo.in, "Raw names, optionally <name>\\t<count>")->required();
    build->add_option("--out", bo.out, "Vocabulary TSV")->required();
    build->add_option("--embeddings", bo.embeddings, "Precomputed <name>\\t<values> vectors");
    build->add_option("--similarity", bo.similarity, "Cosine merge threshold")->capture_default_str();
    build->add_option("--plural-exceptions", bo.plural_exceptions, "Override the plural exception table");
    build->add_option("--merges", bo.merges, "Optional JSON listing semantic merge groups");

    SynthOptions yo;
    auto* synth = app.add_subcommand("synth", "Generate a Zipf long-tailed annotation pool");
    synth->add_option("--out-data", yo.out_data)->required();
    synth->add_option("--out-vocab", yo.out_vocab)->required();
    synth->add_option("--samples", yo.samples)->capture_default_str();
    synth->add_option("--concepts", yo.concepts)->capture_default_str();
    synth->add_option("--exponent", yo.exponent)->capture_default_str();
    synth->add_option("--extra-mean", yo.extra_mean, "Poisson mean of extra instances per sample")->capture_default_str();
    synth->add_option("--seed", yo.seed)->capture_default_str();
    synth->add_flag("--captions", yo.captions);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    RunManifest manifest;
    manifest.command_line = args;
    try {
        if (*sample) return cmd_sample(so, threads, manifest, out);
        if (*analyze) return cmd_analyze(ao, manifest, out);
        if (*profile) {
            po.what = "dataset";
            return cmd_analyze(po, manifest, out);
        }
        if (*fuse_cmd) return cmd_fuse(fo, manifest, out);
        if (*curate) return cmd_curate(co, manifest, out);
        if (*build) return cmd_build_vocab(bo, manifest, out);
        if (*synth) return cmd_synth(yo, manifest, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace cbs::cli
