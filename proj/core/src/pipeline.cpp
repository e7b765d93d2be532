#include <walk/pipeline.hpp>

namespace walk {

namespace {

auto summarize(const std::vector<Violation>& violations) -> std::string {
    std::string out = std::to_string(violations.size()) + " violation(s)";
    if (!violations.empty()) {
        out += ": " + violations.front().code + " at " + violations.front().path;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::ValidationFailed, summarize(violations)), violations_(std::move(violations)) {}

void require_valid(const GraphicSpec& spec, const std::vector<FieldMeta>& fields) {
    auto violations = validate_against(spec, fields);
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
}

auto run_query(const GraphicSpec& spec, const Dataset& dataset, const std::vector<FieldMeta>& fields)
    -> QueryResult {
    require_valid(spec, fields);
    QueryResult result;
    result.mark = default_mark(spec, fields);
    result.workflow = derive_workflow(spec, fields);
    if (result.mark == MarkType::Table) {
        result.pivot = derive_pivot(spec, fields);
        result.rollups = execute_pivot(*result.pivot, dataset);
    } else {
        result.view = execute(result.workflow, dataset);
    }
    return result;
}

auto query_result_to_json(const QueryResult& result) -> OrderedJson {
    OrderedJson out = OrderedJson::object();
    if (result.view) {
        out = view_table_to_json(*result.view);
    } else {
        OrderedJson rollups = OrderedJson::array();
        for (const auto& t : result.rollups) {
            rollups.push_back(view_table_to_json(t));
        }
        out["rollups"] = std::move(rollups);
    }
    out["workflow"] = workflow_to_json(result.workflow);
    return out;
}

auto render(const GraphicSpec& spec, const Dataset& dataset, const std::vector<FieldMeta>& fields)
    -> RenderArtifact {
    if (spec.config.coord == CoordSystem::Geographic) {
        throw Error(ErrorCode::RenderError, "geographic rendering unsupported", "config.coord");
    }
    auto result = run_query(spec, dataset, fields);
    if (result.pivot) {
        return RenderArtifact{true, pivot_model_to_json(to_pivot(*result.pivot, result.rollups))};
    }
    auto plan = derive_facets(spec, fields);
    return RenderArtifact{false, to_chart(spec, fields, plan, *result.view)};
}

}  // namespace walk
