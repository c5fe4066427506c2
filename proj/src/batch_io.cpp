#include "cbs/batch_io.hpp"

#include "cbs/error.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace cbs {

namespace {

constexpr std::string_view kHeaderTag = "#cabs-batches v1";

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError("batch file: bad " + std::string(what) + " '" + std::string(text) + "'");
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string_view expect_field(std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key) throw DataError("batch header: expected " + std::string(key));
    return token.substr(key.size());
}

}  // namespace

std::string format_header(const BatchHeader& header) {
    return std::string(kHeaderTag) + " B=" + std::to_string(header.superbatch_size) +
           " f=" + format_double(header.filter_ratio) + " seed=" + std::to_string(header.seed);
}

BatchHeader parse_header(std::string_view line) {
    if (line.substr(0, kHeaderTag.size()) != kHeaderTag) throw DataError("batch file: missing '#cabs-batches v1' header");
    auto rest = line.substr(kHeaderTag.size());
    std::vector<std::string_view> tokens;
    while (!rest.empty()) {
        if (rest.front() != ' ') throw DataError("batch header: malformed spacing");
        rest.remove_prefix(1);
        const auto end = rest.find(' ');
        tokens.push_back(rest.substr(0, end));
        rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    }
    if (tokens.size() != 3) throw DataError("batch header: expected B=, f= and seed= fields");
    BatchHeader h;
    h.superbatch_size = parse_number<std::size_t>(expect_field(tokens[0], "B="), "B");
    h.filter_ratio = parse_number<double>(expect_field(tokens[1], "f="), "f");
    h.seed = parse_number<std::uint64_t>(expect_field(tokens[2], "seed="), "seed");
    return h;
}

std::string format_batch_line(const SelectedBatch& batch) {
    std::string line = std::to_string(batch.epoch);
    line += '\t';
    line += std::to_string(batch.batch_seq);
    line += '\t';
    line += batch.strategy;
    line += '\t';
    for (std::size_t i = 0; i < batch.indices.size(); ++i) {
        if (i) line += ',';
        line += std::to_string(batch.indices[i]);
    }
    return line;
}

SelectedBatch parse_batch_line(std::string_view line) {
    std::string_view fields[4];
    for (int i = 0; i < 3; ++i) {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw DataError("batch line: expected 4 tab-separated fields");
        fields[i] = line.substr(0, tab);
        line.remove_prefix(tab + 1);
    }
    if (line.find('\t') != std::string_view::npos) throw DataError("batch line: too many fields");
    fields[3] = line;

    SelectedBatch batch;
    batch.epoch = parse_number<std::size_t>(fields[0], "epoch");
    batch.batch_seq = parse_number<std::size_t>(fields[1], "batch sequence");
    if (fields[2].empty()) throw DataError("batch line: empty strategy name");
    batch.strategy = std::string(fields[2]);
    auto rest = fields[3];
    while (true) {
        const auto comma = rest.find(',');
        batch.indices.push_back(parse_number<std::size_t>(rest.substr(0, comma), "index"));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return batch;
}

StreamBatchSink::StreamBatchSink(std::ostream& out, const BatchHeader& header) : out_(out) {
    out_ << format_header(header) << '\n';
    if (!out_) throw IoError("failed to write batch header");
}

void StreamBatchSink::write(const SelectedBatch& batch) {
    out_ << format_batch_line(batch) << '\n';
    if (!out_) throw IoError("failed to write batch record");
}

void StreamBatchSink::end_epoch(std::size_t /*epoch*/) {
    out_.flush();
    if (!out_) throw IoError("failed to flush batch output");
}

void emit_batch(const SelectedBatch& batch, BatchSink& sink) { sink.write(batch); }

BatchFile read_batch_file(std::istream& in) {
    BatchFile file;
    std::string line;
    if (!std::getline(in, line)) throw DataError("batch file: missing header");
    file.header = parse_header(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        try {
            file.batches.push_back(parse_batch_line(line));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

}  // namespace cbs
