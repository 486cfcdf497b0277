#include "genir/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace genir {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

json parse_line(const std::string& line, const std::filesystem::path& path,
                long long line_number) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                 ": malformed JSON line (" + e.what() + ")");
    }
}

void check_item_range(ItemId item, int num_items, const std::filesystem::path& path,
                      long long line_number) {
    if (item < 0 || item >= num_items) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                 ": item id " + std::to_string(item) +
                                 " outside catalog of " + std::to_string(num_items));
    }
}

}  // namespace

void write_search_jsonl(const std::filesystem::path& path, const SearchDataset& data) {
    std::ostringstream out;
    for (const auto& record : data.records) {
        json j;
        j["query"] = record.query;
        j["relevant"] = record.relevant;
        j["split"] = to_string(record.split);
        out << j.dump() << "\n";
    }
    atomic_write(path, out.str());
}

SearchDataset read_search_jsonl(const std::filesystem::path& path, int num_items) {
    SearchDataset data;
    data.num_items = num_items;
    auto in = open_input(path);
    std::string line;
    long long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_number);
        if (!j.contains("query") || !j.contains("relevant") || !j.contains("split")) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": search record needs query/relevant/split");
        }
        SearchRecord record;
        record.query = j.at("query").get<std::string>();
        record.relevant = j.at("relevant").get<std::vector<ItemId>>();
        record.split = split_from_string(j.at("split").get<std::string>());
        if (record.relevant.empty()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": empty relevance set");
        }
        for (ItemId item : record.relevant) {
            check_item_range(item, num_items, path, line_number);
        }
        data.records.push_back(std::move(record));
    }
    return data;
}

void write_rec_jsonl(const std::filesystem::path& path, const RecDataset& data) {
    std::ostringstream out;
    for (const auto& user : data.users) {
        json j;
        j["user"] = user.user_id;
        j["interactions"] = user.interactions;
        out << j.dump() << "\n";
    }
    atomic_write(path, out.str());
}

RecDataset read_rec_jsonl(const std::filesystem::path& path, int num_items) {
    RecDataset data;
    data.num_items = num_items;
    auto in = open_input(path);
    std::string line;
    long long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_number);
        if (!j.contains("user") || !j.contains("interactions")) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": rec record needs user/interactions");
        }
        RecUser user;
        user.user_id = j.at("user").get<int>();
        user.interactions = j.at("interactions").get<std::vector<ItemId>>();
        for (ItemId item : user.interactions) {
            check_item_range(item, num_items, path, line_number);
        }
        data.users.push_back(std::move(user));
    }
    return data;
}

void write_catalog(const std::filesystem::path& path, int num_items,
                   const std::vector<std::string>& names) {
    json j;
    j["num_items"] = num_items;
    if (!names.empty()) j["names"] = names;
    atomic_write(path, j.dump(2) + "\n");
}

int read_catalog(const std::filesystem::path& path) {
    auto in = open_input(path);
    json j = json::parse(in);
    if (!j.contains("num_items")) {
        throw std::runtime_error(path.string() + ": catalog needs num_items");
    }
    int n = j.at("num_items").get<int>();
    if (n <= 0) throw std::runtime_error(path.string() + ": num_items must be positive");
    return n;
}

void write_trec_run(const std::filesystem::path& path, const std::vector<RunEntry>& run,
                    const std::string& run_tag) {
    std::ostringstream out;
    char score_buf[64];
    for (const auto& entry : run) {
        int rank = 1;
        for (const auto& scored : entry.list.entries) {
            std::snprintf(score_buf, sizeof(score_buf), "%.9g", scored.score);
            out << entry.query_id << " Q0 " << scored.item << " " << rank++ << " "
                << score_buf << " " << run_tag << "\n";
        }
    }
    atomic_write(path, out.str());
}

std::vector<RunEntry> read_trec_run(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<RunEntry> run;
    std::string qid, q0, tag;
    ItemId item;
    int rank;
    double score;
    long long line_number = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (!(ls >> qid >> q0 >> item >> rank >> score >> tag)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": malformed run line");
        }
        if (run.empty() || run.back().query_id != qid) {
            run.push_back({qid, {}});
        }
        run.back().list.entries.push_back({item, score});
        run.back().list.k = static_cast<int>(run.back().list.entries.size());
    }
    return run;
}

void write_qrels_jsonl(const std::filesystem::path& path,
                       const std::vector<QrelEntry>& qrels) {
    std::ostringstream out;
    for (const auto& entry : qrels) {
        json j;
        j["id"] = entry.query_id;
        j["task"] = to_string(entry.task);
        j["relevant"] = entry.relevant;
        out << j.dump() << "\n";
    }
    atomic_write(path, out.str());
}

std::vector<QrelEntry> read_qrels_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<QrelEntry> qrels;
    std::string line;
    long long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_number);
        QrelEntry entry;
        entry.query_id = j.at("id").get<std::string>();
        std::string task = j.at("task").get<std::string>();
        if (task != "search" && task != "rec") {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": task must be search or rec");
        }
        entry.task = (task == "search") ? Task::Search : Task::Rec;
        entry.relevant = j.at("relevant").get<std::vector<ItemId>>();
        if (entry.relevant.empty()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_number) +
                                     ": empty relevance set");
        }
        qrels.push_back(std::move(entry));
    }
    return qrels;
}

namespace {

constexpr char kCheckpointMagic[8] = {'G', 'E', 'N', 'I', 'R', 'C', 'K', '1'};

std::uint64_t swap_bytes_u64(std::uint64_t x) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) {
        r = (r << 8) | (x & 0xffULL);
        x >>= 8;
    }
    return r;
}

void append_doubles_le(std::string& out, const std::vector<double>& values) {
    static_assert(std::endian::native == std::endian::little ||
                      std::endian::native == std::endian::big,
                  "mixed endian not supported");
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        if constexpr (std::endian::native == std::endian::big) {
            bits = swap_bytes_u64(bits);
        }
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.append(bytes, 8);
    }
}

std::vector<double> read_doubles_le(std::istream& in, std::size_t count,
                                    const std::filesystem::path& path) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        char bytes[8];
        if (!in.read(bytes, 8)) {
            throw std::runtime_error(path.string() + ": truncated checkpoint payload");
        }
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) {
            bits = swap_bytes_u64(bits);
        }
        std::memcpy(&values[i], &bits, 8);
    }
    return values;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const RetrieverParams& params,
                     const RetrieverConfig& config, std::uint64_t vocab_hash) {
    json header;
    header["vocab_size"] = params.vocab_size;
    header["num_items"] = params.num_items;
    header["embedding_dim"] = params.embedding_dim;
    header["item_token_offset"] = params.item_token_offset;
    header["tied"] = params.tied;
    header["vocab_hash"] = vocab_hash;
    header["config"] = {{"embedding_dim", config.embedding_dim},
                        {"learning_rate", config.learning_rate},
                        {"weight_decay", config.weight_decay},
                        {"batch_size", config.batch_size},
                        {"epochs", config.epochs},
                        {"tie_output_embeddings", config.tie_output_embeddings},
                        {"seed", config.seed}};
    std::string header_str = header.dump();

    std::string blob(kCheckpointMagic, sizeof(kCheckpointMagic));
    std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    char len_bytes[4] = {static_cast<char>(len & 0xff),
                         static_cast<char>((len >> 8) & 0xff),
                         static_cast<char>((len >> 16) & 0xff),
                         static_cast<char>((len >> 24) & 0xff)};
    blob.append(len_bytes, 4);
    blob += header_str;
    append_doubles_le(blob, params.input_embeddings);
    append_doubles_le(blob, params.output_embeddings);
    append_doubles_le(blob, params.item_bias);
    atomic_write(path, blob);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto in = open_input(path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw std::runtime_error(path.string() + ": not a checkpoint file");
    }
    char len_bytes[4];
    if (!in.read(len_bytes, 4)) {
        throw std::runtime_error(path.string() + ": truncated checkpoint header");
    }
    std::uint32_t len = 0;
    for (int i = 3; i >= 0; --i) {
        len = (len << 8) | static_cast<unsigned char>(len_bytes[i]);
    }
    std::string header_str(len, '\0');
    if (!in.read(header_str.data(), len)) {
        throw std::runtime_error(path.string() + ": truncated checkpoint header");
    }
    json header = json::parse(header_str);

    Checkpoint ckpt;
    ckpt.params.vocab_size = header.at("vocab_size").get<int>();
    ckpt.params.num_items = header.at("num_items").get<int>();
    ckpt.params.embedding_dim = header.at("embedding_dim").get<int>();
    ckpt.params.item_token_offset = header.at("item_token_offset").get<int>();
    ckpt.params.tied = header.at("tied").get<bool>();
    ckpt.vocab_hash = header.at("vocab_hash").get<std::uint64_t>();
    const json& cfg = header.at("config");
    ckpt.config.embedding_dim = cfg.at("embedding_dim").get<int>();
    ckpt.config.learning_rate = cfg.at("learning_rate").get<double>();
    ckpt.config.weight_decay = cfg.at("weight_decay").get<double>();
    ckpt.config.batch_size = cfg.at("batch_size").get<int>();
    ckpt.config.epochs = cfg.at("epochs").get<int>();
    ckpt.config.tie_output_embeddings = cfg.at("tie_output_embeddings").get<bool>();
    ckpt.config.seed = cfg.at("seed").get<std::uint64_t>();

    if (ckpt.params.vocab_size <= 0 || ckpt.params.num_items <= 0 ||
        ckpt.params.embedding_dim <= 0) {
        throw std::runtime_error(path.string() + ": checkpoint header has invalid dims");
    }
    std::size_t vd = static_cast<std::size_t>(ckpt.params.vocab_size) *
                     static_cast<std::size_t>(ckpt.params.embedding_dim);
    std::size_t od = ckpt.params.tied
                         ? 0
                         : static_cast<std::size_t>(ckpt.params.num_items) *
                               static_cast<std::size_t>(ckpt.params.embedding_dim);
    ckpt.params.input_embeddings = read_doubles_le(in, vd, path);
    ckpt.params.output_embeddings = read_doubles_le(in, od, path);
    ckpt.params.item_bias =
        read_doubles_le(in, static_cast<std::size_t>(ckpt.params.num_items), path);
    return ckpt;
}

std::string file_hash(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    auto emit_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    };
    emit_row(header);
    for (const auto& row : rows) emit_row(row);
    atomic_write(path, out.str());
}

void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config_json.empty() ? json::object()
                                               : json::parse(manifest.config_json);
    j["seeds"] = manifest.seeds;
    j["inputs"] = manifest.input_hashes;
    j["outputs"] = manifest.outputs;
    j["wall_clock_ms"] = manifest.wall_clock_ms;
    j["artifact_version"] = manifest.artifact_version;
    atomic_write(directory / "manifest.json", j.dump(2) + "\n");
}

}  // namespace genir
