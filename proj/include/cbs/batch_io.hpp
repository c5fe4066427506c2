#pragma once

#include "cbs/sampler.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

/// Metadata carried by the `#cabs-batches v1` header line.
struct BatchHeader {
    std::size_t superbatch_size = 0;
    double filter_ratio = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const BatchHeader&, const BatchHeader&) = default;
};

std::string format_header(const BatchHeader& header);
BatchHeader parse_header(std::string_view line);

/// `<epoch>\t<batch_seq>\t<strategy>\t<i0>,<i1>,...` without the newline.
std::string format_batch_line(const SelectedBatch& batch);
SelectedBatch parse_batch_line(std::string_view line);

class BatchSink {
public:
    virtual ~BatchSink() = default;
    virtual void write(const SelectedBatch& batch) = 0;
    virtual void end_epoch(std::size_t /*epoch*/) {}
};

/// Appends the wire format to an ostream. The header is written on construction.
class StreamBatchSink final : public BatchSink {
public:
    StreamBatchSink(std::ostream& out, const BatchHeader& header);
    void write(const SelectedBatch& batch) override;
    void end_epoch(std::size_t epoch) override;

private:
    std::ostream& out_;
};

class MemoryBatchSink final : public BatchSink {
public:
    void write(const SelectedBatch& batch) override { batches.push_back(batch); }
    std::vector<SelectedBatch> batches;
};

/// Appends one record; I/O failures surface as IoError.
void emit_batch(const SelectedBatch& batch, BatchSink& sink);

struct BatchFile {
    BatchHeader header;
    std::vector<SelectedBatch> batches;
};

/// Strict reader: a missing header or malformed line throws DataError.
BatchFile read_batch_file(std::istream& in);

}  // namespace cbs
