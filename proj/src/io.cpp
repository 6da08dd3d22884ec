#include "phytaylor/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "phytaylor/errors.hpp"

namespace phytaylor {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& token, long line_no) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("cannot parse number '" + token + "'", line_no);
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + token + "'", line_no);
    return v;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write file: " + path);
    out << content;
    if (!out) throw FileError("write failed: " + path);
}

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct LineReader {
    std::istringstream in;
    long line_no = 0;

    explicit LineReader(const std::string& text) : in(text) {}

    // Next non-empty, non-comment line; false at end of input.
    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            bool blank = true;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            if (!blank) return true;
        }
        return false;
    }
};

std::string suppressor_plan_text(const std::vector<SuppressorChannel>& channels) {
    std::string out;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        if (!ch.active) continue;
        out += "suppressor " + std::to_string(c + 1) + " " + format_double(ch.kappa) + " " +
               format_double(ch.rho) + (ch.noise_positive ? " positive" : "") + "\n";
    }
    return out;
}

}  // namespace

std::string ModelConfig::to_text() const {
    std::ostringstream out;
    out << "phy-taylor model v1\n";
    out << "input_dim " << input_dim << "\n";
    out << "first_order " << first_order << "\n";
    out << "terminal_out_dim " << terminal_out_dim << "\n";
    out << "knowledge\n";
    for (const auto& row : knowledge) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << " ";
            out << (row[j].has_value() ? format_double(*row[j]) : "*");
        }
        out << "\n";
    }
    out << "end\n";
    for (const auto& layer : plan) {
        out << "layer\n";
        out << "out_dim " << layer.out_dim << "\n";
        out << "order " << layer.order << "\n";
        out << "activation " << activation_name(layer.activation) << "\n";
        out << suppressor_plan_text(layer.suppressor);
        out << "end\n";
    }
    return out.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
    LineReader reader(text);
    std::string line;
    if (!reader.next(line) || line != "phy-taylor model v1")
        throw VersionUnknown("model config: expected header 'phy-taylor model v1'");

    ModelConfig cfg;
    bool have_knowledge = false;
    while (reader.next(line)) {
        auto tokens = split_tokens(line);
        if (tokens.empty()) continue;
        const std::string& key = tokens[0];
        if (key == "input_dim" || key == "first_order" || key == "terminal_out_dim") {
            if (tokens.size() != 2)
                throw ParseError("model config: '" + key + "' needs one value", reader.line_no);
            const int v = static_cast<int>(parse_double(tokens[1], reader.line_no));
            if (key == "input_dim") cfg.input_dim = v;
            if (key == "first_order") cfg.first_order = v;
            if (key == "terminal_out_dim") cfg.terminal_out_dim = v;
        } else if (key == "knowledge") {
            if (cfg.input_dim < 1 || cfg.first_order < 1 || cfg.terminal_out_dim < 1)
                throw ParseError("model config: dimensions must precede the knowledge block",
                                 reader.line_no);
            const std::int64_t cols = basis_len(cfg.input_dim, cfg.first_order);
            for (int r = 0; r < cfg.terminal_out_dim; ++r) {
                if (!reader.next(line))
                    throw ParseError("model config: knowledge block ended early", reader.line_no);
                auto row_tokens = split_tokens(line);
                if (static_cast<std::int64_t>(row_tokens.size()) != cols)
                    throw ParseError("model config: knowledge row " + std::to_string(r + 1) +
                                         " has " + std::to_string(row_tokens.size()) +
                                         " columns, expected " + std::to_string(cols),
                                     reader.line_no);
                std::vector<KnowledgeEntry> row;
                for (std::size_t c = 0; c < row_tokens.size(); ++c) {
                    if (row_tokens[c] == "*") {
                        row.emplace_back(std::nullopt);
                        continue;
                    }
                    try {
                        row.emplace_back(parse_double(row_tokens[c], reader.line_no));
                    } catch (const ParseError&) {
                        throw ParseError("model config: bad knowledge token '" + row_tokens[c] +
                                             "' at row " + std::to_string(r + 1) + ", column " +
                                             std::to_string(c + 1),
                                         reader.line_no);
                    }
                }
                cfg.knowledge.push_back(std::move(row));
            }
            if (!reader.next(line) || line != "end")
                throw ParseError("model config: knowledge block must close with 'end'",
                                 reader.line_no);
            have_knowledge = true;
        } else if (key == "layer") {
            LayerPlan layer;
            std::vector<std::tuple<int, double, double, bool>> suppressor_entries;
            bool closed = false;
            while (reader.next(line) && !(closed = (line == "end"))) {
                auto fields = split_tokens(line);
                if (fields.size() >= 2 && fields[0] == "out_dim")
                    layer.out_dim = static_cast<int>(parse_double(fields[1], reader.line_no));
                else if (fields.size() >= 2 && fields[0] == "order")
                    layer.order = static_cast<int>(parse_double(fields[1], reader.line_no));
                else if (fields.size() >= 2 && fields[0] == "activation")
                    layer.activation = activation_from_name(fields[1]);
                else if (fields[0] == "suppressor" && (fields.size() == 4 || fields.size() == 5)) {
                    const int channel = static_cast<int>(parse_double(fields[1], reader.line_no));
                    const double kappa = parse_double(fields[2], reader.line_no);
                    const double rho = parse_double(fields[3], reader.line_no);
                    const bool positive = fields.size() == 5 && fields[4] == "positive";
                    if (fields.size() == 5 && fields[4] != "positive")
                        throw ParseError("model config: bad suppressor flag '" + fields[4] + "'",
                                         reader.line_no);
                    suppressor_entries.emplace_back(channel, kappa, rho, positive);
                } else {
                    throw ParseError("model config: unknown layer field '" + fields[0] + "'",
                                     reader.line_no);
                }
            }
            if (!closed)
                throw ParseError("model config: layer block must close with 'end'",
                                 reader.line_no);
            if (!suppressor_entries.empty()) {
                // Channel count equals the previous layer's width (or the
                // input dimension for the first layer).
                const int in_dim =
                    cfg.plan.empty() ? cfg.input_dim : cfg.plan.back().out_dim;
                layer.suppressor.assign(static_cast<std::size_t>(in_dim), SuppressorChannel{});
                for (const auto& [channel, kappa, rho, positive] : suppressor_entries) {
                    if (channel < 1 || channel > in_dim)
                        throw ParseError("model config: suppressor channel " +
                                             std::to_string(channel) + " out of range",
                                         reader.line_no);
                    auto& ch = layer.suppressor[static_cast<std::size_t>(channel - 1)];
                    ch.active = true;
                    ch.kappa = kappa;
                    ch.rho = rho;
                    ch.noise_positive = positive;
                }
            }
            cfg.plan.push_back(std::move(layer));
        } else {
            throw ParseError("model config: unknown directive '" + key + "'", reader.line_no);
        }
    }
    if (!have_knowledge) throw ParseError("model config: missing knowledge block", reader.line_no);
    if (cfg.plan.empty()) throw ParseError("model config: missing layer blocks", reader.line_no);
    return cfg;
}

KnowledgeSpec ModelConfig::knowledge_spec() const {
    return KnowledgeSpec(build_basis(input_dim, first_order), knowledge);
}

PhyTaylorModel ModelConfig::build() const { return build_model(knowledge_spec(), plan); }

ModelConfig load_model_config(const std::string& path) {
    return ModelConfig::from_text(read_file(path));
}

void save_model_config(const ModelConfig& config, const std::string& path) {
    write_file(path, config.to_text());
}

namespace {

std::string matrix_block(const Mat& m) {
    std::ostringstream out;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << " ";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
    return out.str();
}

Mat read_matrix_block(LineReader& reader, int rows, int cols) {
    Mat m(rows, cols);
    std::string line;
    for (int i = 0; i < rows; ++i) {
        if (!reader.next(line)) throw ParseError("weights: matrix block ended early", reader.line_no);
        auto tokens = split_tokens(line);
        if (static_cast<int>(tokens.size()) != cols)
            throw ParseError("weights: row has " + std::to_string(tokens.size()) +
                                 " values, expected " + std::to_string(cols),
                             reader.line_no);
        for (int j = 0; j < cols; ++j) m(i, j) = parse_double(tokens[static_cast<std::size_t>(j)], reader.line_no);
    }
    return m;
}

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hash_hex(std::uint64_t hash) {
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex_digit(hash);
        hash >>= 4;
    }
    return out;
}

}  // namespace

void save_weights(const PhyTaylorModel& model, std::uint64_t config_hash,
                  const std::string& path) {
    std::ostringstream out;
    out << "phy-taylor weights v1\n";
    out << "config_hash " << hash_hex(config_hash) << "\n";
    for (int t = 0; t < model.layer_count(); ++t) {
        const PhnLayer& layer = model.layer(t);
        out << "layer " << (t + 1) << " rows " << layer.W.rows() << " cols " << layer.W.cols()
            << "\n";
        out << "K\n" << matrix_block(layer.K);
        out << "W\n" << matrix_block(layer.W);
        out << "end\n";
    }
    write_file(path, out.str());
}

void load_weights(PhyTaylorModel& model, std::uint64_t config_hash, const std::string& path) {
    LineReader reader(read_file(path));
    std::string line;
    if (!reader.next(line) || line != "phy-taylor weights v1")
        throw VersionUnknown("weights: expected header 'phy-taylor weights v1'");
    if (!reader.next(line)) throw ParseError("weights: missing config hash", reader.line_no);
    auto tokens = split_tokens(line);
    if (tokens.size() != 2 || tokens[0] != "config_hash")
        throw ParseError("weights: missing config hash", reader.line_no);
    if (tokens[1] != hash_hex(config_hash))
        throw HashMismatch("weights were saved for a different model config (hash " + tokens[1] +
                           ", expected " + hash_hex(config_hash) + ")");

    for (int t = 0; t < model.layer_count(); ++t) {
        PhnLayer& layer = model.layer(t);
        if (!reader.next(line)) throw ParseError("weights: missing layer block", reader.line_no);
        tokens = split_tokens(line);
        if (tokens.size() != 6 || tokens[0] != "layer" || tokens[2] != "rows" || tokens[4] != "cols")
            throw ParseError("weights: bad layer header", reader.line_no);
        const int rows = static_cast<int>(parse_double(tokens[3], reader.line_no));
        const int cols = static_cast<int>(parse_double(tokens[5], reader.line_no));
        if (rows != layer.W.rows() || cols != layer.W.cols())
            throw DimensionMismatch("weights: layer " + std::to_string(t + 1) + " stored as " +
                                    std::to_string(rows) + "x" + std::to_string(cols) +
                                    ", model expects " + std::to_string(layer.W.rows()) + "x" +
                                    std::to_string(layer.W.cols()));
        if (!reader.next(line) || line != "K")
            throw ParseError("weights: expected K block", reader.line_no);
        layer.K = read_matrix_block(reader, rows, cols);
        if (!reader.next(line) || line != "W")
            throw ParseError("weights: expected W block", reader.line_no);
        layer.W = read_matrix_block(reader, rows, cols);
        if (!reader.next(line) || line != "end")
            throw ParseError("weights: layer block must close with 'end'", reader.line_no);
    }
}

Dataset load_csv(const std::string& path, int input_dim, int target_dim) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open file: " + path);
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("csv: empty file", 1);
    ++line_no;

    auto split_csv = [](const std::string& row) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream stream(row);
        while (std::getline(stream, cell, ',')) cells.push_back(cell);
        return cells;
    };

    const auto header = split_csv(line);
    const int expected = input_dim + target_dim;
    if (static_cast<int>(header.size()) != expected)
        throw DimensionMismatch("csv: header has " + std::to_string(header.size()) +
                                " columns, expected " + std::to_string(input_dim) + " inputs + " +
                                std::to_string(target_dim) + " targets");

    Dataset data;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != expected)
            throw ParseError("csv: row has " + std::to_string(cells.size()) +
                                 " columns, expected " + std::to_string(expected),
                             line_no);
        Vec input(static_cast<std::size_t>(input_dim));
        Vec target(static_cast<std::size_t>(target_dim));
        for (int c = 0; c < input_dim; ++c)
            input[static_cast<std::size_t>(c)] = parse_double(cells[static_cast<std::size_t>(c)], line_no);
        for (int c = 0; c < target_dim; ++c)
            target[static_cast<std::size_t>(c)] =
                parse_double(cells[static_cast<std::size_t>(input_dim + c)], line_no);
        data.inputs.push_back(std::move(input));
        data.targets.push_back(std::move(target));
    }
    data.assign_default_splits();
    return data;
}

void save_pairs_csv(const Dataset& data, const std::string& path,
                    const std::string& name_prefix) {
    std::ostringstream out;
    const std::size_t in_dim = data.inputs.empty() ? 0 : data.inputs[0].size();
    const std::size_t target_dim = data.targets.empty() ? 0 : data.targets[0].size();
    for (std::size_t c = 0; c < in_dim; ++c) out << (c ? "," : "") << name_prefix << (c + 1);
    for (std::size_t c = 0; c < target_dim; ++c) out << "," << name_prefix << (c + 1) << "_next";
    out << "\n";
    for (std::size_t r = 0; r < data.inputs.size(); ++r) {
        for (std::size_t c = 0; c < in_dim; ++c)
            out << (c ? "," : "") << format_double(data.inputs[r][c]);
        for (std::size_t c = 0; c < target_dim; ++c) out << "," << format_double(data.targets[r][c]);
        out << "\n";
    }
    write_file(path, out.str());
}

std::vector<Vec> load_trajectory_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open file: " + path);
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("csv: empty file", 1);
    ++line_no;
    std::vector<Vec> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream stream(line);
        while (std::getline(stream, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != dim)
            throw ParseError("csv: row has " + std::to_string(cells.size()) +
                                 " columns, expected " + std::to_string(dim),
                             line_no);
        Vec state(static_cast<std::size_t>(dim));
        for (int c = 0; c < dim; ++c)
            state[static_cast<std::size_t>(c)] = parse_double(cells[static_cast<std::size_t>(c)], line_no);
        out.push_back(std::move(state));
    }
    return out;
}

void save_trajectory_csv(const std::vector<Vec>& trajectory, const std::string& path,
                         const std::string& name_prefix) {
    std::ostringstream out;
    const std::size_t dim = trajectory.empty() ? 0 : trajectory[0].size();
    for (std::size_t c = 0; c < dim; ++c) out << (c ? "," : "") << name_prefix << (c + 1);
    out << "\n";
    for (const Vec& state : trajectory) {
        for (std::size_t c = 0; c < dim; ++c) out << (c ? "," : "") << format_double(state[c]);
        out << "\n";
    }
    write_file(path, out.str());
}

void save_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss\n";
    for (const auto& rec : history)
        out << rec.epoch << "," << format_double(rec.train_loss) << ","
            << format_double(rec.val_loss) << "\n";
    write_file(path, out.str());
}

std::vector<SafetyQuadratic> load_quadratics(const std::string& path) {
    LineReader reader(read_file(path));
    std::string line;
    if (!reader.next(line) || line != "phy-taylor safety v1")
        throw VersionUnknown("safety config: expected header 'phy-taylor safety v1'");
    std::vector<SafetyQuadratic> out;
    while (reader.next(line)) {
        auto tokens = split_tokens(line);
        if (tokens.size() != 7 || tokens[0] != "quadratic")
            throw ParseError("safety config: expected 'quadratic <sign> <b> <p00 p01 p10 p11>'",
                             reader.line_no);
        QuadraticSign sign;
        if (tokens[1] == "plus")
            sign = QuadraticSign::plus;
        else if (tokens[1] == "minus")
            sign = QuadraticSign::minus;
        else
            throw ParseError("safety config: bad sign '" + tokens[1] + "'", reader.line_no);
        const double b = parse_double(tokens[2], reader.line_no);
        Mat p(2, 2);
        p(0, 0) = parse_double(tokens[3], reader.line_no);
        p(0, 1) = parse_double(tokens[4], reader.line_no);
        p(1, 0) = parse_double(tokens[5], reader.line_no);
        p(1, 1) = parse_double(tokens[6], reader.line_no);
        out.emplace_back(sign, b, std::move(p));
    }
    return out;
}

void save_quadratics(const std::vector<SafetyQuadratic>& quadratics, const std::string& path) {
    std::ostringstream out;
    out << "phy-taylor safety v1\n";
    for (const auto& q : quadratics) {
        out << "quadratic " << (q.sign() == QuadraticSign::plus ? "plus" : "minus") << " "
            << format_double(q.offset());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out << " " << format_double(q.p()(i, j));
        out << "\n";
    }
    write_file(path, out.str());
}

std::string RunReport::to_text() const {
    std::ostringstream out;
    out << "phy-taylor report v1\n";
    out << "config_hash " << hash_hex(config_hash) << "\n";
    out << "seed " << seed << "\n";
    if (!history.empty()) {
        out << "final_train_loss " << format_double(history.back().train_loss) << "\n";
        out << "final_val_loss " << format_double(history.back().val_loss) << "\n";
        out << "epochs " << history.size() << "\n";
    }
    if (compliance_max_deviation) {
        out << "compliance_max_deviation " << format_double(*compliance_max_deviation) << "\n";
        out << "compliance_positions " << compliance_positions << "\n";
        out << "compliance_probes " << compliance_probes << "\n";
    }
    for (std::size_t i = 0; i < rollout_errors.size(); ++i)
        out << "rollout_error_" << (i + 1) << " " << format_double(rollout_errors[i]) << "\n";
    return out.str();
}

void save_report(const RunReport& report, const std::string& path) {
    write_file(path, report.to_text());
}

}  // namespace phytaylor
