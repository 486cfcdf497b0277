#pragma once
// File formats: JSONL datasets, a JSON catalog, TREC run files, JSONL qrels,
// binary checkpoints with a JSON header, CSV reports, and the run manifest
// written alongside every output directory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "genir/corpus.hpp"
#include "genir/decode.hpp"
#include "genir/retriever.hpp"

namespace genir {

// --- datasets -------------------------------------------------------------

// One JSON object per line: {"query": str, "relevant": [int], "split": str}
void write_search_jsonl(const std::filesystem::path& path, const SearchDataset& data);
SearchDataset read_search_jsonl(const std::filesystem::path& path, int num_items);

// {"user": int, "interactions": [int]}
void write_rec_jsonl(const std::filesystem::path& path, const RecDataset& data);
RecDataset read_rec_jsonl(const std::filesystem::path& path, int num_items);

// {"num_items": int, "names": [str]?}
void write_catalog(const std::filesystem::path& path, int num_items,
                   const std::vector<std::string>& names = {});
int read_catalog(const std::filesystem::path& path);

// --- runs and qrels -------------------------------------------------------

struct RunEntry {
    std::string query_id;
    RankedList list;
};

// TREC format: `qid Q0 itemId rank score runTag`, rank starting at 1.
void write_trec_run(const std::filesystem::path& path, const std::vector<RunEntry>& run,
                    const std::string& run_tag);
std::vector<RunEntry> read_trec_run(const std::filesystem::path& path);

struct QrelEntry {
    std::string query_id;
    Task task = Task::Search;
    std::vector<ItemId> relevant;
};

// {"id": str, "task": str, "relevant": [int]}
void write_qrels_jsonl(const std::filesystem::path& path,
                       const std::vector<QrelEntry>& qrels);
std::vector<QrelEntry> read_qrels_jsonl(const std::filesystem::path& path);

// --- checkpoints ----------------------------------------------------------

// Magic, little-endian uint32 header length, JSON header (dims, config echo,
// vocabulary hash), then the parameter arrays as little-endian float64.
void save_checkpoint(const std::filesystem::path& path, const RetrieverParams& params,
                     const RetrieverConfig& config, std::uint64_t vocab_hash);
struct Checkpoint {
    RetrieverParams params;
    RetrieverConfig config;
    std::uint64_t vocab_hash = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

// --- misc -----------------------------------------------------------------

// FNV-1a 64 over the file bytes, hex encoded. Throws if unreadable.
std::string file_hash(const std::filesystem::path& path);

// Write-to-temp-then-rename so partial files never appear under the name.
void atomic_write(const std::filesystem::path& path, const std::string& content);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct RunManifest {
    std::string command;
    std::string config_json;  // serialized config snapshot
    std::vector<std::uint64_t> seeds;
    std::map<std::string, std::string> input_hashes;  // path -> hash
    std::vector<std::string> outputs;
    double wall_clock_ms = 0.0;
    std::string artifact_version = "0.1.0";
};

void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest);

}  // namespace genir
