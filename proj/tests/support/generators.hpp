#pragma once

#include <walk/spec_model.hpp>
#include <walk/table_store.hpp>

#include <optional>
#include <random>

namespace walk::testing {

using Rng = std::mt19937_64;

// Up to `max_rows` x 6 table mixing categorical strings (with quotes),
// a small-integer ordinal column, measures on a 0.25 grid (sums stay exact),
// a positive measure for log transforms and a date column. Nulls throughout.
auto random_dataset(Rng& rng, std::size_t max_rows = 50) -> Dataset;

// A spec that passes validate_against(fields). When `chartable` is set the
// resolved mark is never table and derive_facets succeeds.
auto random_valid_spec(Rng& rng, const Dataset& dataset, const std::vector<FieldMeta>& fields, bool chartable)
    -> GraphicSpec;

// Valid table-mark spec with 0-2 dimensions per axis. With `decomposable`
// the measures use sum, count, min or max only.
auto random_pivot_spec(Rng& rng, const Dataset& dataset, const std::vector<FieldMeta>& fields, bool decomposable)
    -> GraphicSpec;

// Structurally well-formed spec with arbitrary names and values, not tied to
// any dataset. Used for the parse/serialize roundtrip.
auto random_document_spec(Rng& rng) -> GraphicSpec;

}  // namespace walk::testing
