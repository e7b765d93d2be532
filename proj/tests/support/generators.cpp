#include "generators.hpp"

#include <walk/compute_link.hpp>
#include <walk/error.hpp>

#include <algorithm>
#include <stdexcept>

namespace walk::testing {

namespace {

constexpr std::int64_t kDayMs = 86'400'000;
constexpr std::int64_t kFirstDay = 14975;  // 2011-01-01

auto chance(Rng& rng, double p) -> bool {
    return std::bernoulli_distribution(p)(rng);
}

auto uniform(Rng& rng, int lo, int hi) -> int {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
auto pick(Rng& rng, const std::vector<T>& items) -> const T& {
    return items[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(items.size()) - 1))];
}

auto grid(Rng& rng, int lo, int hi) -> double {
    return uniform(rng, lo * 4, hi * 4) / 4.0;
}


auto make_column(Rng& rng, const std::string& name, std::size_t rows) -> Column {
    static const std::vector<std::string> kCats = {"North", "South", "O'Hare", "say \"hi\"", "\xC3\x9Cml\xC3\xA4ut"};
    static const std::vector<std::string> kTags = {"a", "b"};
    std::vector<Scalar> values;
    StorageKind kind = StorageKind::Float64;
    for (std::size_t r = 0; r < rows; ++r) {
        if (name == "cat") {
            kind = StorageKind::Utf8;
            values.emplace_back(chance(rng, 0.1) ? Scalar{} : Scalar{pick(rng, kCats)});
        } else if (name == "tag") {
            kind = StorageKind::Utf8;
            values.emplace_back(chance(rng, 0.2) ? Scalar{} : Scalar{pick(rng, kTags)});
        } else if (name == "yr") {
            values.emplace_back(chance(rng, 0.1) ? Scalar{} : Scalar{static_cast<double>(uniform(rng, 2011, 2014))});
        } else if (name == "amount") {
            values.emplace_back(chance(rng, 0.1) ? Scalar{} : Scalar{grid(rng, -40, 40)});
        } else if (name == "price") {
            if (chance(rng, 0.1)) {
                values.emplace_back(Scalar{});
            } else if (chance(rng, 0.1)) {
                values.emplace_back(Scalar{static_cast<double>(uniform(rng, -1, 0))});
            } else {
                values.emplace_back(Scalar{grid(rng, 1, 100)});
            }
        } else if (name == "day") {
            kind = StorageKind::Timestamp;
            values.emplace_back(chance(rng, 0.1)
                                    ? Scalar{}
                                    : Scalar{Timestamp{(kFirstDay + uniform(rng, 0, 1460)) * kDayMs}});
        } else {
            throw std::logic_error("unknown generated column " + name);
        }
    }
    // Inference needs at least one non-null value to choose float over utf8.
    if (rows > 0 && kind == StorageKind::Float64 &&
        std::all_of(values.begin(), values.end(), [](const Scalar& v) { return is_null(v); })) {
        values[0] = 1.0;
    }
    return Column::from_scalars(name, kind, values);
}

auto dims_of(const std::vector<FieldMeta>& fields) -> std::vector<const FieldMeta*> {
    std::vector<const FieldMeta*> out;
    for (const auto& f : fields) {
        if (f.analytic_type == AnalyticType::Dimension) {
            out.push_back(&f);
        }
    }
    return out;
}

auto quantitative(const std::vector<FieldMeta>& fields) -> std::vector<const FieldMeta*> {
    std::vector<const FieldMeta*> out;
    for (const auto& f : fields) {
        if (f.semantic_type == SemanticType::Quantitative) {
            out.push_back(&f);
        }
    }
    return out;
}

auto random_filter(Rng& rng, const Dataset& dataset, const FieldMeta& field) -> std::optional<Filter> {
    const Column* column = dataset.find(field.fid);
    if (column == nullptr) {
        return std::nullopt;
    }
    auto sample = [&]() -> Scalar {
        if (column->size() == 0 || chance(rng, 0.15)) {
            switch (column->kind()) {
                case StorageKind::Utf8:
                    return std::string("zzz");
                case StorageKind::Timestamp:
                    return Timestamp{kFirstDay * kDayMs - kDayMs};
                default:
                    return 1999.0;
            }
        }
        return column->at(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(column->size()) - 1)));
    };
    bool can_range = field.semantic_type != SemanticType::Nominal && column->kind() != StorageKind::Utf8;
    if (can_range && chance(rng, 0.5)) {
        auto a = sample();
        auto b = sample();
        auto as_double = [](const Scalar& v) -> std::optional<double> {
            if (const auto* d = std::get_if<double>(&v)) {
                return *d;
            }
            if (const auto* t = std::get_if<Timestamp>(&v)) {
                return static_cast<double>(t->millis);
            }
            return std::nullopt;
        };
        auto lo = as_double(a);
        auto hi = as_double(b);
        if (!lo || !hi) {
            return std::nullopt;
        }
        if (*lo > *hi) {
            std::swap(lo, hi);
        }
        return Filter{field.fid, Range{*lo, *hi}, false};
    }
    OneOf one_of;
    int n = uniform(rng, 1, 3);
    for (int i = 0; i < n; ++i) {
        auto v = sample();
        if (const auto* t = std::get_if<Timestamp>(&v)) {
            if (chance(rng, 0.5)) {
                v = format_iso_datetime(*t);
            } else {
                v = static_cast<double>(t->millis);
            }
        }
        one_of.values.push_back(v);
    }
    return Filter{field.fid, one_of, false};
}

void add_filters(Rng& rng, GraphicSpec& spec, const Dataset& dataset, const std::vector<FieldMeta>& fields,
                 int max_count) {
    int n = uniform(rng, 0, max_count);
    for (int i = 0; i < n; ++i) {
        if (auto f = random_filter(rng, dataset, pick(rng, fields))) {
            spec.filters.push_back(std::move(*f));
        }
    }
}

void add_computed(Rng& rng, GraphicSpec& spec, const std::vector<FieldMeta>& fields, int max_count) {
    auto sources = quantitative(fields);
    if (sources.empty()) {
        return;
    }
    int n = uniform(rng, 0, max_count);
    for (int i = 0; i < n; ++i) {
        ComputedField c;
        c.out_fid = "cmp_" + std::to_string(i);
        c.source_fid = pick(rng, sources)->fid;
        switch (uniform(rng, 0, 2)) {
            case 0:
                c.transform = Transform{Transform::Op::Log2, 0};
                break;
            case 1:
                c.transform = Transform{Transform::Op::Log10, 0};
                break;
            default:
                c.transform = Transform{Transform::Op::Bin, pick(rng, std::vector<int>{1, 2, 3, 5, 10})};
                break;
        }
        spec.computed.push_back(c);
    }
}

auto measure_ref(Rng& rng, const std::vector<FieldMeta>& all, bool aggregated) -> std::optional<FieldRef> {
    auto quant = quantitative(all);
    if (!aggregated) {
        std::vector<const FieldMeta*> measures;
        for (const auto* f : quant) {
            if (f->analytic_type == AnalyticType::Measure) {
                measures.push_back(f);
            }
        }
        if (measures.empty()) {
            return std::nullopt;
        }
        return FieldRef{pick(rng, measures)->fid, Aggregation::None};
    }
    if (quant.empty() || chance(rng, 0.15)) {
        return FieldRef{pick(rng, all).fid, Aggregation::Count};
    }
    std::vector<Aggregation> aggs(kAggregations.begin(), kAggregations.end());
    return FieldRef{pick(rng, quant)->fid, pick(rng, aggs)};
}

auto dim_ref(Rng& rng, const std::vector<FieldMeta>& all) -> std::optional<FieldRef> {
    auto dims = dims_of(all);
    if (dims.empty()) {
        return std::nullopt;
    }
    return FieldRef{pick(rng, dims)->fid, Aggregation::None};
}

void fill_axis(Rng& rng, std::vector<FieldRef>& axis, const std::vector<FieldMeta>& all, bool aggregated,
               int max_dims, int max_measures) {
    int nd = uniform(rng, 0, max_dims);
    for (int i = 0; i < nd; ++i) {
        if (auto r = dim_ref(rng, all)) {
            axis.push_back(*r);
        }
    }
    int nm = uniform(rng, 0, max_measures);
    for (int i = 0; i < nm; ++i) {
        if (auto r = measure_ref(rng, all, aggregated)) {
            axis.push_back(*r);
        }
    }
}

void random_config(Rng& rng, GraphicSpec& spec) {
    static const std::vector<StackMode> kStacks = {StackMode::Stack, StackMode::Normalize, StackMode::None};
    static const std::vector<std::string> kPalettes = {"default", "tableau10", "category20", "viridis"};
    spec.stack = pick(rng, kStacks);
    spec.config.palette = pick(rng, kPalettes);
    if (chance(rng, 0.3)) {
        spec.config.layout = FixedLayout{uniform(rng, 100, 900), uniform(rng, 100, 600)};
    }
}

}  // namespace

auto random_dataset(Rng& rng, std::size_t max_rows) -> Dataset {
    static const std::vector<std::string> kOptional = {"tag", "yr", "price", "day"};
    std::vector<std::string> names = {"cat", "amount"};
    for (const auto& name : kOptional) {
        if (chance(rng, 0.6)) {
            names.push_back(name);
        }
    }
    std::shuffle(names.begin(), names.end(), rng);
    std::size_t rows = 0;
    double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (roll < 0.05) {
        rows = 0;
    } else if (roll < 0.1) {
        rows = 1;
    } else {
        rows = static_cast<std::size_t>(uniform(rng, 2, static_cast<int>(max_rows)));
    }
    std::vector<Column> columns;
    for (const auto& name : names) {
        columns.push_back(make_column(rng, name, rows));
    }
    return Dataset("ds_rand", "random", std::move(columns));
}

auto random_valid_spec(Rng& rng, const Dataset& dataset, const std::vector<FieldMeta>& fields, bool chartable)
    -> GraphicSpec {
    static const std::vector<MarkType> kMarks = {MarkType::Auto,  MarkType::Bar,  MarkType::Line, MarkType::Area,
                                                 MarkType::Point, MarkType::Circle, MarkType::Tick, MarkType::Rect,
                                                 MarkType::Arc,   MarkType::Text};
    for (int attempt = 0; attempt < 10000; ++attempt) {
        GraphicSpec spec;
        spec.name = "random " + std::to_string(attempt);
        spec.aggregated = chance(rng, 0.75);
        spec.mark = pick(rng, kMarks);
        add_computed(rng, spec, fields, 2);
        auto all = resolve_fields(spec, fields);
        fill_axis(rng, spec.channel(Channel::X), all, spec.aggregated, 2, 1);
        fill_axis(rng, spec.channel(Channel::Y), all, spec.aggregated, 2, 2);
        for (auto channel : {Channel::Color, Channel::Size, Channel::Shape, Channel::Opacity}) {
            if (chance(rng, channel == Channel::Shape ? 0.1 : 0.25)) {
                auto ref = chance(rng, 0.5) ? dim_ref(rng, all) : measure_ref(rng, all, spec.aggregated);
                if (ref) {
                    spec.channel(channel).push_back(*ref);
                }
            }
        }
        add_filters(rng, spec, dataset, fields, 2);
        if (chance(rng, 0.4)) {
            std::vector<FieldRef> refs;
            for (auto channel : kChannels) {
                for (const auto& r : spec.channel(channel)) {
                    refs.push_back(r);
                }
            }
            if (!refs.empty()) {
                spec.sort = SortSpec{pick(rng, refs).fid, chance(rng, 0.5) ? SortDirection::Asc : SortDirection::Desc};
            }
        }
        random_config(rng, spec);
        if (!validate_against(spec, fields).empty()) {
            continue;
        }
        if (chartable) {
            if (default_mark(spec, fields) == MarkType::Table) {
                continue;
            }
            try {
                derive_facets(spec, fields);
            } catch (const Error&) {
                continue;
            }
        }
        return spec;
    }
    throw std::runtime_error("could not generate a valid spec");
}

auto random_pivot_spec(Rng& rng, const Dataset& dataset, const std::vector<FieldMeta>& fields, bool decomposable)
    -> GraphicSpec {
    static const std::vector<Aggregation> kDecomposable = {Aggregation::Sum, Aggregation::Count, Aggregation::Min,
                                                           Aggregation::Max};
    std::vector<Aggregation> any(kAggregations.begin(), kAggregations.end());
    for (int attempt = 0; attempt < 10000; ++attempt) {
        GraphicSpec spec;
        spec.name = "pivot " + std::to_string(attempt);
        spec.mark = MarkType::Table;
        if (chance(rng, 0.3)) {
            add_computed(rng, spec, fields, 1);
            if (decomposable) {
                // Sums of logs are not exact; keep only bin dimensions.
                for (auto& c : spec.computed) {
                    c.transform = Transform{Transform::Op::Bin, 4};
                }
            }
        }
        auto all = resolve_fields(spec, fields);
        auto dims = dims_of(all);
        std::shuffle(dims.begin(), dims.end(), rng);
        std::size_t used = 0;
        for (auto channel : {Channel::X, Channel::Y}) {
            int n = uniform(rng, 0, 2);
            for (int i = 0; i < n && used < dims.size(); ++i) {
                spec.channel(channel).push_back(FieldRef{dims[used++]->fid, Aggregation::None});
            }
        }
        std::vector<FieldRef> values;
        auto quant = quantitative(all);
        int nv = uniform(rng, 1, 2);
        for (int i = 0; i < nv; ++i) {
            if (quant.empty() || chance(rng, 0.2)) {
                values.push_back(FieldRef{pick(rng, all).fid, Aggregation::Count});
            } else {
                values.push_back(FieldRef{pick(rng, quant)->fid, pick(rng, decomposable ? kDecomposable : any)});
            }
        }
        spec.set_table_values(values);
        add_filters(rng, spec, dataset, fields, 1);
        if (validate_against(spec, fields).empty()) {
            return spec;
        }
    }
    throw std::runtime_error("could not generate a valid pivot spec");
}

auto random_document_spec(Rng& rng) -> GraphicSpec {
    static const std::vector<std::string> kNames = {
        "a", "sales", "Order Date", "quote\"d", "back\\slash", "\xE5\x8C\x97\xE4\xBA\xAC", "tab\there", "x.y[0]",
        "emoji \xF0\x9F\x93\x88"};
    static const std::vector<MarkType> kMarks = {MarkType::Auto,   MarkType::Bar,  MarkType::Line, MarkType::Area,
                                                 MarkType::Point,  MarkType::Circle, MarkType::Tick, MarkType::Rect,
                                                 MarkType::Arc,    MarkType::Text, MarkType::Table};
    std::vector<Aggregation> aggs(kAggregations.begin(), kAggregations.end());
    aggs.push_back(Aggregation::None);
    auto ref = [&]() { return FieldRef{pick(rng, kNames), pick(rng, aggs)}; };
    auto number = [&]() -> double {
        switch (uniform(rng, 0, 3)) {
            case 0:
                return uniform(rng, -1000, 1000);
            case 1:
                return std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
            case 2:
                return std::uniform_real_distribution<double>(0.0, 1.0)(rng) * 1e-12;
            default:
                return grid(rng, -10, 10);
        }
    };

    GraphicSpec spec;
    spec.name = chance(rng, 0.1) ? std::string() : pick(rng, kNames);
    spec.mark = pick(rng, kMarks);
    spec.aggregated = chance(rng, 0.5);
    for (auto channel : kChannels) {
        int max = channel == Channel::X || channel == Channel::Y ? 3 : 1;
        int n = uniform(rng, 0, max);
        for (int i = 0; i < n; ++i) {
            spec.channel(channel).push_back(ref());
        }
    }
    int nc = uniform(rng, 0, 3);
    for (int i = 0; i < nc; ++i) {
        ComputedField c{pick(rng, kNames) + "_" + std::to_string(i), pick(rng, kNames), {}};
        int op = uniform(rng, 0, 2);
        c.transform = op == 0   ? Transform{Transform::Op::Log2, 0}
                      : op == 1 ? Transform{Transform::Op::Log10, 0}
                                : Transform{Transform::Op::Bin, uniform(rng, 1, 50)};
        spec.computed.push_back(c);
    }
    int nf = uniform(rng, 0, 3);
    for (int i = 0; i < nf; ++i) {
        if (chance(rng, 0.5)) {
            double a = number();
            double b = number();
            spec.filters.push_back(Filter{pick(rng, kNames), Range{std::min(a, b), std::max(a, b)}, false});
        } else {
            OneOf one_of;
            int n = uniform(rng, 1, 4);
            for (int k = 0; k < n; ++k) {
                int kind = uniform(rng, 0, 2);
                one_of.values.push_back(kind == 0   ? Scalar{}
                                        : kind == 1 ? Scalar{number()}
                                                    : Scalar{pick(rng, kNames)});
            }
            spec.filters.push_back(Filter{pick(rng, kNames), one_of, false});
        }
    }
    if (chance(rng, 0.5)) {
        spec.sort = SortSpec{pick(rng, kNames), chance(rng, 0.5) ? SortDirection::Asc : SortDirection::Desc};
    }
    random_config(rng, spec);
    spec.config.coord = chance(rng, 0.2) ? CoordSystem::Geographic : CoordSystem::Generic;
    spec.config.palette = chance(rng, 0.2) ? pick(rng, kNames) : spec.config.palette;
    int ns = uniform(rng, 0, 4);
    for (int i = 0; i < ns; ++i) {
        auto key = pick(rng, kNames);
        switch (uniform(rng, 0, 4)) {
            case 0:
                spec.config.style[key] = pick(rng, kNames);
                break;
            case 1:
                spec.config.style[key] = uniform(rng, -5, 5);
                break;
            case 2:
                spec.config.style[key] = number();
                break;
            case 3:
                spec.config.style[key] = chance(rng, 0.5);
                break;
            default:
                spec.config.style[key] = nullptr;
                break;
        }
    }
    if (chance(rng, 0.3)) {
        spec.set_table_values({ref(), ref()});
    }
    return spec;
}

}  // namespace walk::testing
