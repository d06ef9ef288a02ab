#include "smsnme/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "smsnme/errors.hpp"

namespace smsnme {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

bool parse_double(const std::string &field, double &value) {
    const char *end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, value);
    return res.ec == std::errc() && res.ptr == end;
}

[[noreturn]] void line_error(std::size_t line, const std::string &what) {
    std::ostringstream msg;
    msg << "line " << line << ": " << what;
    throw InputError(msg.str());
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Dataset read_dataset_csv(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            names = split_fields(line);
            break;
        }
    }
    if (names.empty()) {
        throw InputError("dataset file is empty");
    }
    const std::size_t cols = names.size();
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != cols) {
            std::ostringstream msg;
            msg << "expected " << cols << " fields, found " << fields.size();
            line_error(line_no, msg.str());
        }
        for (std::size_t k = 0; k < cols; ++k) {
            double v = 0.0;
            if (!parse_double(fields[k], v) || !std::isfinite(v)) {
                line_error(line_no, "column '" + names[k] + "' is not a finite number: '" +
                                        fields[k] + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) {
        throw InputError("dataset has a header but no rows");
    }
    RowMatrix z = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                              static_cast<Eigen::Index>(cols));
    return Dataset(std::move(z), std::move(names));
}

Dataset read_dataset_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    try {
        return read_dataset_csv(in);
    } catch (const InputError &e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_dataset_csv(const Dataset &data, std::ostream &out) {
    const auto &names = data.column_names();
    for (std::size_t k = 0; k < names.size(); ++k) {
        out << (k ? "," : "") << names[k];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < data.z().rows(); ++i) {
        for (Eigen::Index k = 0; k < data.z().cols(); ++k) {
            out << (k ? "," : "") << format_double(data.z()(i, k));
        }
        out << '\n';
    }
}

void write_latents_csv(const MeLatents &latents, std::ostream &out) {
    out << "x,label,u,t\n";
    for (std::size_t i = 0; i < latents.x.size(); ++i) {
        out << format_double(latents.x[i]) << ',' << latents.labels[i] + 1 << ','
            << format_double(latents.u[i]) << ',' << format_double(latents.t[i]) << '\n';
    }
}

void write_chain_csv(const Chain &chain, std::ostream &out) {
    if (chain.draws.empty()) {
        throw ParameterError("chain has no stored draws");
    }
    const MeTheta &first = chain.draws.front();
    out << "draw,loglik";
    for (const auto &name : parameter_names(first.family, first.responses(), first.groups())) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t l = 0; l < chain.draws.size(); ++l) {
        out << l + 1 << ',' << format_double(chain.loglik[l]);
        const Vector v = flatten(chain.draws[l]);
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            out << ',' << format_double(v(k));
        }
        out << '\n';
    }
}

Chain read_chain_csv(std::istream &in, Family family) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("chain file is empty");
    }
    const auto header = split_fields(line);
    int responses = 0;
    int groups = 0;
    for (const auto &h : header) {
        responses += h.rfind("alpha_", 0) == 0 ? 1 : 0;
        groups += h.rfind("mu_", 0) == 0 ? 1 : 0;
    }
    if (header.size() < 2 || header[0] != "draw" || header[1] != "loglik" || responses < 1 ||
        groups < 1) {
        throw InputError("line 1: not a chain header");
    }
    const auto expected = parameter_names(family, responses, groups);
    if (expected.size() + 2 != header.size() ||
        !std::equal(expected.begin(), expected.end(), header.begin() + 2)) {
        throw InputError("line 1: chain columns do not match the " + model_label(family) +
                         " parameterization");
    }
    Chain chain;
    chain.family = family;
    chain.groups = groups;
    std::size_t line_no = 1;
    Vector values(static_cast<Eigen::Index>(expected.size()));
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            line_error(line_no, "wrong number of fields");
        }
        double ll = 0.0;
        if (!parse_double(fields[1], ll)) {
            line_error(line_no, "loglik is not a number");
        }
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (!parse_double(fields[k + 2], values(static_cast<Eigen::Index>(k)))) {
                line_error(line_no, "column '" + expected[k] + "' is not a number");
            }
        }
        MeTheta theta = unflatten(values, family, responses, groups);
        try {
            theta.validate();
        } catch (const ParameterError &e) {
            line_error(line_no, e.what());
        }
        chain.draws.push_back(std::move(theta));
        chain.loglik.push_back(ll);
    }
    if (chain.draws.empty()) {
        throw InputError("chain file has no draws");
    }
    return chain;
}

void write_latent_summary_csv(const Chain &chain, std::ostream &out) {
    out << "row,x_mean,modal_label\n";
    for (std::size_t i = 0; i < chain.latent_x_mean.size(); ++i) {
        const std::size_t label =
            i < chain.latent_modal_label.size() ? chain.latent_modal_label[i] + 1 : 0;
        out << i + 1 << ',' << format_double(chain.latent_x_mean[i]) << ',' << label << '\n';
    }
}

void write_summary_csv(const Chain &chain, std::ostream &out) {
    out << "parameter,mean,sd,q2.5,q97.5\n";
    for (const auto &s : summarize(chain)) {
        out << s.name << ',' << format_double(s.mean) << ',' << format_double(s.sd) << ','
            << format_double(s.q025) << ',' << format_double(s.q975) << '\n';
    }
}

nlohmann::json to_json(const McmcConfig &config) {
    return {{"iterations", config.iterations}, {"burn_in", config.burn_in},
            {"thin", config.thin},             {"seed", config.seed},
            {"stream", config.stream},         {"clone_factor", config.clone_factor}};
}

nlohmann::json to_json(const PriorSpec &prior) {
    auto vec = [](const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    auto normal = [&](const NormalPrior &np) {
        return nlohmann::json{{"mean", vec(np.mean)}, {"variance", vec(np.variance)}};
    };
    return {{"alpha", normal(prior.alpha)},
            {"beta", normal(prior.beta)},
            {"mu", normal(prior.mu)},
            {"delta", normal(prior.delta)},
            {"e", prior.e},
            {"g", prior.g},
            {"h", prior.h},
            {"l", prior.l},
            {"m", prior.m},
            {"kappa", vec(prior.kappa)},
            {"lambda0", prior.lambda0},
            {"lambda1", prior.lambda1},
            {"phi_sl", prior.phi_sl},
            {"psi_sl", prior.psi_sl},
            {"rho0", prior.rho0},
            {"rho1", prior.rho1},
            {"tau0", prior.tau0},
            {"tau1", prior.tau1}};
}

std::string file_checksum(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize k = 0; k < in.gcount(); ++k) {
            hash ^= static_cast<unsigned char>(buf[k]);
            hash *= 0x100000001b3ULL;
        }
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

void atomic_write(const std::filesystem::path &path, const std::string &content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw InputError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace smsnme
