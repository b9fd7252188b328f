#include "wiae/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wiae/errors.hpp"
#include "wiae/rng.hpp"

namespace wiae {

void SeriesDataset::set_split_fraction(double fraction) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw ConfigError("split fraction must be in (0, 1), got " + std::to_string(fraction));
    }
    train_end = static_cast<std::size_t>(static_cast<double>(values.size()) * fraction);
    if (train_end < 1) train_end = 1;
    if (train_end >= values.size()) train_end = values.size() - 1;
}

void SeriesDataset::validate() const {
    if (values.size() < 2) throw DataError("dataset '" + name + "' has fewer than 2 samples");
    if (train_end < 1 || train_end >= values.size()) {
        throw ConfigError("dataset '" + name + "': train_end " + std::to_string(train_end) +
                          " outside [1, " + std::to_string(values.size()) + ")");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("dataset '" + name + "' contains non-finite value");
    }
}

std::string generator_kind_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::kLar: return "LAR";
        case GeneratorKind::kMa: return "MA";
        case GeneratorKind::kMc: return "MC";
    }
    return "?";
}

GeneratorKind generator_kind_from_name(const std::string& name) {
    if (name == "LAR" || name == "lar") return GeneratorKind::kLar;
    if (name == "MA" || name == "ma") return GeneratorKind::kMa;
    if (name == "MC" || name == "mc") return GeneratorKind::kMc;
    throw ConfigError("unknown generator kind '" + name + "'");
}

void GeneratorSpec::validate() const {
    if (length < 1) throw ConfigError("generator: length must be >= 1");
    if (!(period_seconds > 0.0)) throw ConfigError("generator: period must be positive");
}

namespace {

SeriesDataset finish(std::vector<double> values, const GeneratorSpec& spec) {
    SeriesDataset ds;
    ds.values = std::move(values);
    ds.period_seconds = spec.period_seconds;
    ds.name = generator_kind_name(spec.kind);
    if (ds.values.size() >= 2) ds.set_split_fraction(0.8);
    return ds;
}

}  // namespace

SeriesDataset gen_lar_driven(std::size_t length, std::size_t burn_in,
                             const std::function<double()>& next_u) {
    std::vector<double> out;
    out.reserve(length);
    double x = 0.0;
    for (std::size_t i = 0; i < burn_in + length; ++i) {
        x = 0.5 * x + next_u();
        if (i >= burn_in) out.push_back(x);
    }
    SeriesDataset ds;
    ds.values = std::move(out);
    ds.name = "LAR";
    if (ds.values.size() >= 2) ds.set_split_fraction(0.8);
    return ds;
}

SeriesDataset gen_ma_driven(std::size_t length, std::size_t burn_in,
                            const std::function<double()>& next_u) {
    std::vector<double> out;
    out.reserve(length);
    double prev_u = 0.0;
    for (std::size_t i = 0; i < burn_in + length; ++i) {
        const double u = next_u();
        const double x = u + 2.5 * prev_u;
        prev_u = u;
        if (i >= burn_in) out.push_back(x);
    }
    SeriesDataset ds;
    ds.values = std::move(out);
    ds.name = "MA";
    if (ds.values.size() >= 2) ds.set_split_fraction(0.8);
    return ds;
}

SeriesDataset gen_lar(const GeneratorSpec& spec) {
    spec.validate();
    SplitRng rng = SplitRng(spec.seed).split(0x1a5);
    SeriesDataset ds = gen_lar_driven(spec.length, spec.burn_in,
                                      [&rng] { return rng.next_uniform(-1.0, 1.0); });
    ds.period_seconds = spec.period_seconds;
    return ds;
}

SeriesDataset gen_ma(const GeneratorSpec& spec) {
    spec.validate();
    SplitRng rng = SplitRng(spec.seed).split(0x3a7);
    SeriesDataset ds = gen_ma_driven(spec.length, spec.burn_in,
                                     [&rng] { return rng.next_uniform(-1.0, 1.0); });
    ds.period_seconds = spec.period_seconds;
    return ds;
}

SeriesDataset gen_mc(const GeneratorSpec& spec) {
    spec.validate();
    SplitRng rng = SplitRng(spec.seed).split(0x2c3);
    std::vector<double> out;
    out.reserve(spec.length);
    // symmetric chain: the stationary law is (1/2, 1/2)
    int state = rng.next_unit() < 0.5 ? 0 : 1;
    for (std::size_t i = 0; i < spec.burn_in + spec.length; ++i) {
        if (rng.next_unit() >= 0.6) state = 1 - state;
        if (i >= spec.burn_in) out.push_back(static_cast<double>(state));
    }
    return finish(std::move(out), spec);
}

SeriesDataset generate(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case GeneratorKind::kLar: return gen_lar(spec);
        case GeneratorKind::kMa: return gen_ma(spec);
        case GeneratorKind::kMc: return gen_mc(spec);
    }
    throw ConfigError("unknown generator kind");
}

// --- timestamps ---------------------------------------------------------

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char t = 0;
    char tail[8] = {0};
    const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%7s",
                                &y, &mo, &d, &t, &h, &mi, &s, tail);
    const bool tz_ok = tail[0] == '\0' || std::string(tail) == "Z";
    if (got < 7 || (t != 'T' && t != ' ') || !tz_ok || mo < 1 || mo > 12 || d < 1 || d > 31 ||
        h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
        throw ParseError("invalid ISO-8601 timestamp '" + text + "'");
    }
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// --- CSV ------------------------------------------------------------------

SeriesDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    SeriesDataset ds;
    ds.name = path.stem().string();

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::int64_t> stamps;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "timestamp,value") {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected header 'timestamp,value'");
            }
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing comma");
        }
        std::int64_t stamp;
        try {
            stamp = parse_iso8601(line.substr(0, comma));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const std::string value_text = line.substr(comma + 1);
        char* end = nullptr;
        const double v = std::strtod(value_text.c_str(), &end);
        if (end == value_text.c_str() || *end != '\0') {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": bad value '" + value_text + "'");
        }
        if (!std::isfinite(v)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": non-finite value");
        }
        if (!stamps.empty() && stamp <= stamps.back()) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": timestamps must be strictly increasing");
        }
        stamps.push_back(stamp);
        ds.values.push_back(v);
    }
    if (!header_seen || ds.values.empty()) {
        throw ParseError(path.string() + ": no data rows");
    }
    if (stamps.size() >= 2) {
        const std::int64_t period = stamps[1] - stamps[0];
        for (std::size_t i = 2; i < stamps.size(); ++i) {
            if (stamps[i] - stamps[i - 1] != period) {
                throw FormatError(path.string() + ": irregular sampling at row " +
                                  std::to_string(i + 1) + " (expected period " +
                                  std::to_string(period) + "s)");
            }
        }
        ds.period_seconds = static_cast<double>(period);
        ds.start_epoch_seconds = stamps.front();
    }
    if (ds.values.size() >= 2) ds.set_split_fraction(0.8);
    return ds;
}

void save_csv(const SeriesDataset& dataset, const std::filesystem::path& path,
              const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "timestamp,value\n";
    const auto period = static_cast<std::int64_t>(dataset.period_seconds);
    char buf[64];
    for (std::size_t i = 0; i < dataset.values.size(); ++i) {
        const std::int64_t stamp = dataset.start_epoch_seconds + static_cast<std::int64_t>(i) * period;
        std::snprintf(buf, sizeof buf, "%.17g", dataset.values[i]);
        out << format_iso8601(stamp) << ',' << buf << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

// --- standardization --------------------------------------------------------

StandardizedSeries standardize(const SeriesDataset& dataset) {
    dataset.validate();
    const auto train = dataset.train_split();
    double mean = 0.0;
    for (double v : train) mean += v;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (double v : train) var += (v - mean) * (v - mean);
    var /= static_cast<double>(train.size());
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
        throw DegenerateDataError("dataset '" + dataset.name +
                                  "': constant training split cannot be standardized");
    }
    StandardizedSeries out;
    out.standardizer = Standardizer{mean, sd};
    out.values = out.standardizer.transform(dataset.values);
    return out;
}

std::vector<double> destandardize(std::span<const double> values, const Standardizer& s) {
    return s.inverse(values);
}

// --- blocks -----------------------------------------------------------------

std::vector<std::vector<double>> make_blocks(std::span<const double> series, std::size_t n,
                                             std::size_t stride) {
    if (n < 1) throw ContractError("make_blocks: n must be >= 1");
    if (stride < 1) throw ContractError("make_blocks: stride must be >= 1");
    if (series.size() < n) {
        throw InsufficientHistoryError("make_blocks: series length " +
                                       std::to_string(series.size()) + " shorter than block " +
                                       std::to_string(n));
    }
    std::vector<std::vector<double>> blocks;
    for (std::size_t t = n - 1; t < series.size(); t += stride) {
        std::vector<double> b(n);
        for (std::size_t j = 0; j < n; ++j) b[j] = series[t - j];
        blocks.push_back(std::move(b));
    }
    return blocks;
}

}  // namespace wiae
