#include "opium/snapshot.hpp"

#include "opium/error.hpp"
#include "opium/prng.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace opium {

namespace {

std::string hex(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

class Writer {
public:
    Writer(std::string_view kind, std::size_t d0, std::size_t d1)
    {
        out_ << "opium-snapshot " << kSnapshotVersion << '\n';
        out_ << "kind " << kind << '\n';
        out_ << "dims " << d0 << ' ' << d1 << '\n';
    }

    void param(std::string_view name, double v) { out_ << "param " << name << ' ' << hex(v) << '\n'; }
    void param(std::string_view name, std::string_view v) { out_ << "param " << name << ' ' << v << '\n'; }
    void count(std::uint64_t k) { out_ << "k " << k << '\n'; }

    void matrix(std::string_view name, const Matrix& m)
    {
        out_ << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c)
                out_ << (c ? " " : "") << hex(m(r, c));
            out_ << '\n';
        }
    }

    std::string finish()
    {
        out_ << "end\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

struct Parsed {
    std::string kind;
    std::size_t d0 = 0;
    std::size_t d1 = 0;
    std::map<std::string, std::string> params;
    std::uint64_t k = 0;
    std::map<std::string, Matrix> matrices;
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    Parsed parse()
    {
        Parsed p;
        auto header = words(next_line("header"));
        if (header.size() != 2 || header[0] != "opium-snapshot")
            error("expected 'opium-snapshot <version>' header");
        if (to_u64(header[1]) != static_cast<std::uint64_t>(kSnapshotVersion))
            error("unsupported snapshot version " + header[1]);

        auto kind = words(next_line("kind"));
        if (kind.size() != 2 || kind[0] != "kind")
            error("expected 'kind <name>'");
        p.kind = kind[1];

        auto dims = words(next_line("dims"));
        if (dims.size() != 3 || dims[0] != "dims")
            error("expected 'dims <a> <b>'");
        p.d0 = to_u64(dims[1]);
        p.d1 = to_u64(dims[2]);

        for (;;) {
            auto w = words(next_line("body"));
            if (w.empty())
                error("blank line");
            if (w[0] == "end") {
                if (w.size() != 1)
                    error("trailing tokens after 'end'");
                return p;
            }
            if (w[0] == "param") {
                if (w.size() != 3)
                    error("expected 'param <name> <value>'");
                p.params[w[1]] = w[2];
            } else if (w[0] == "k") {
                if (w.size() != 2)
                    error("expected 'k <count>'");
                p.k = to_u64(w[1]);
            } else if (w[0] == "matrix") {
                if (w.size() != 4)
                    error("expected 'matrix <name> <rows> <cols>'");
                const std::size_t rows = to_u64(w[2]);
                const std::size_t cols = to_u64(w[3]);
                std::vector<double> data;
                data.reserve(rows * cols);
                for (std::size_t r = 0; r < rows; ++r) {
                    auto vals = words(next_line("matrix row"));
                    if (vals.size() != cols)
                        error("matrix row has " + std::to_string(vals.size()) + " values, expected " +
                              std::to_string(cols));
                    for (const auto& v : vals)
                        data.push_back(to_real(v));
                }
                try {
                    p.matrices.emplace(w[1], Matrix::from_data(rows, cols, std::move(data)));
                } catch (const Error& e) {
                    error(e.what());
                }
            } else {
                error("unknown record '" + w[0] + "'");
            }
        }
    }

    [[noreturn]] void error(const std::string& what) const
    {
        fail(Errc::parse_error, "snapshot line " + std::to_string(line_no_) + ": " + what);
    }

    double to_real(const std::string& s) const
    {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
            error("bad real '" + s + "'");
        return v;
    }

    std::uint64_t to_u64(const std::string& s) const
    {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            error("bad count '" + s + "'");
        errno = 0;
        const auto v = std::strtoull(s.c_str(), nullptr, 10);
        if (errno == ERANGE)
            error("count out of range '" + s + "'");
        return v;
    }

private:
    std::string_view next_line(const char* what)
    {
        if (pos_ >= text_.size())
            fail(Errc::parse_error, "snapshot truncated at line " + std::to_string(line_no_ + 1) + " (expected " +
                                        what + ")");
        const auto nl = text_.find('\n', pos_);
        const auto end = nl == std::string_view::npos ? text_.size() : nl;
        auto line = text_.substr(pos_, end - pos_);
        pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
        ++line_no_;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        return line;
    }

    static std::vector<std::string> words(std::string_view line)
    {
        std::vector<std::string> out;
        std::istringstream in{std::string(line)};
        for (std::string w; in >> w;)
            out.push_back(std::move(w));
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

double real_param(const Parsed& p, const Reader& r, const std::string& name)
{
    auto it = p.params.find(name);
    if (it == p.params.end())
        r.error("missing param '" + name + "'");
    return r.to_real(it->second);
}

Matrix take_matrix(Parsed& p, const Reader& r, const std::string& name, std::size_t rows, std::size_t cols)
{
    auto it = p.matrices.find(name);
    if (it == p.matrices.end())
        r.error("missing matrix '" + name + "'");
    if (it->second.rows() != rows || it->second.cols() != cols)
        r.error("matrix '" + name + "' is " + it->second.shape() + ", dims imply " + std::to_string(rows) + "x" +
                std::to_string(cols));
    return std::move(it->second);
}

} // namespace

std::string serialize(const HiddenLayer& layer)
{
    Writer w("hidden-layer", layer.hidden_dim(), layer.input_dim());
    w.param("activation", to_string(layer.activation));
    w.param("seed", std::to_string(layer.seed));
    w.param("rng", std::string(Rng::kAlgorithm) + "-v" + std::to_string(Rng::kVersion));
    w.count(0);
    w.matrix("w1", layer.w1);
    return w.finish();
}

std::string serialize(const AnySolver& solver)
{
    const auto& wts = weights(solver);
    Writer w(to_string(kind_of(solver)), wts.cols(), wts.rows());
    if (const auto* s = std::get_if<OpiumSolver>(&solver)) {
        w.param("epsilon", s->epsilon());
        w.count(s->k());
        w.matrix("w", s->weights());
        w.matrix("theta", s->theta());
    } else if (const auto* s = std::get_if<GrevilleSolver>(&solver)) {
        w.param("c_tol", s->c_tol());
        w.count(s->k());
        w.matrix("w", s->weights());
        w.matrix("theta", s->theta());
        w.matrix("phi", s->phi());
    } else if (const auto* s = std::get_if<LightSolver>(&solver)) {
        w.param("g", s->g());
        w.count(s->k());
        w.matrix("w", s->weights());
    } else if (const auto* s = std::get_if<DynamicSolver>(&solver)) {
        w.param("epsilon", s->epsilon());
        w.param("alpha", s->alpha());
        w.count(s->k());
        w.matrix("w", s->weights());
        w.matrix("theta", s->theta());
    }
    return w.finish();
}

HiddenLayer parse_hidden_layer(std::string_view text)
{
    Reader r(text);
    Parsed p = r.parse();
    if (p.kind != "hidden-layer")
        r.error("snapshot kind is '" + p.kind + "', expected 'hidden-layer'");
    HiddenLayer layer;
    auto act = p.params.count("activation") ? parse_activation(p.params["activation"]) : std::nullopt;
    if (!act)
        r.error("missing or unknown activation");
    layer.activation = *act;
    if (!p.params.count("seed"))
        r.error("missing param 'seed'");
    layer.seed = r.to_u64(p.params["seed"]);
    layer.w1 = take_matrix(p, r, "w1", p.d0, p.d1 + 1);
    return layer;
}

AnySolver parse_solver(std::string_view text)
{
    Reader r(text);
    Parsed p = r.parse();
    const auto kind = parse_solver_kind(p.kind);
    const std::size_t m = p.d0;
    const std::size_t n = p.d1;
    try {
        switch (kind.value_or(SolverKind::batch)) {
        case SolverKind::opium:
            return OpiumSolver::restore(take_matrix(p, r, "w", n, m), take_matrix(p, r, "theta", m, m),
                                        real_param(p, r, "epsilon"), p.k);
        case SolverKind::greville:
            return GrevilleSolver::restore(take_matrix(p, r, "w", n, m), take_matrix(p, r, "theta", m, m),
                                           take_matrix(p, r, "phi", m, m), real_param(p, r, "c_tol"), p.k);
        case SolverKind::light:
            return LightSolver::restore(take_matrix(p, r, "w", n, m), real_param(p, r, "g"), p.k);
        case SolverKind::dynamic:
            return DynamicSolver::restore(take_matrix(p, r, "w", n, m), take_matrix(p, r, "theta", m, m),
                                          real_param(p, r, "epsilon"), real_param(p, r, "alpha"), p.k);
        case SolverKind::batch:
            break;
        }
    } catch (const Error& e) {
        if (e.code() == Errc::parse_error)
            throw;
        fail(Errc::parse_error, std::string("snapshot state rejected: ") + e.what());
    }
    r.error("snapshot kind '" + p.kind + "' is not a solver");
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(Errc::io_error, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        fail(Errc::io_error, "write failed for " + path.string());
}

} // namespace opium
