#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "newsky/analytics/audiences.hpp"
#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/analytics/kcore.hpp"
#include "newsky/analytics/lexicon.hpp"
#include "newsky/analytics/louvain.hpp"
#include "newsky/api/server.hpp"
#include "newsky/app/log.hpp"
#include "newsky/app/pipeline.hpp"
#include "newsky/ingest/frame_decoder.hpp"
#include "newsky/parser/post_parser.hpp"
#include "newsky/parser/public_suffix.hpp"

namespace py = pybind11;
using namespace newsky;

namespace {

py::object to_python(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

ratings::RatingFiles rating_files(const std::filesystem::path& scores, std::optional<std::filesystem::path> mbfc,
                                  std::optional<std::filesystem::path> allsides,
                                  std::optional<std::filesystem::path> newsguard) {
    return {scores, std::move(mbfc), std::move(allsides), std::move(newsguard)};
}

analytics::Graph graph_from(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    analytics::Graph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node(std::to_string(i));
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw py::index_error("edge endpoint out of range");
        g.add_edge(a, b);
    }
    return g;
}

py::dict ingest_replay(const std::filesystem::path& store_path, const std::filesystem::path& replay,
                       const std::optional<std::filesystem::path>& posts_fixture, const std::string& resolver_url,
                       std::optional<std::int64_t> resume_cursor) {
    app::PipelineOptions opts;
    opts.source = ingest::StreamSource::parse("replay:" + replay.string());
    opts.source.resume_cursor = resume_cursor;
    if (posts_fixture) {
        opts.fetcher = resolver::FixturePostFetcher::from_file(posts_fixture->string());
        opts.resolver.rate_per_second = 1e6;
        opts.resolve_linger = std::chrono::milliseconds(20);
    } else {
        opts.fetcher = std::make_shared<resolver::HttpPostFetcher>(resolver_url);
    }
    app::PipelineStats stats;
    {
        py::gil_scoped_release release;
        auto store = store::Store::open(store_path);
        stats = app::run_pipeline(*store, opts);
    }
    py::dict out;
    out["events"] = stats.events;
    out["posts"] = stats.posts;
    out["reposts"] = stats.reposts;
    out["likes"] = stats.likes;
    out["observations"] = stats.observations;
    out["engagements"] = stats.engagements;
    out["not_found"] = stats.not_found;
    out["dropped_unresolved"] = stats.dropped_unresolved;
    out["decode_errors"] = stats.stream.decode_errors;
    out["last_cursor"] = stats.last_cursor;
    return out;
}

class Api {
public:
    Api(const std::filesystem::path& store_path, const std::filesystem::path& score_file,
        std::optional<std::filesystem::path> mbfc, std::optional<std::filesystem::path> allsides,
        std::optional<std::filesystem::path> newsguard, std::optional<std::filesystem::path> jobs_dir)
        : service_(std::make_shared<ratings::RatingService>(
                       rating_files(score_file, std::move(mbfc), std::move(allsides), std::move(newsguard))),
                   options(store_path, jobs_dir)) {}

    // (status, content type, body)
    std::tuple<int, std::string, std::string> get(const std::string& path,
                                                  const std::map<std::string, std::string>& params) const {
        api::Response r;
        {
            py::gil_scoped_release release;
            r = service_.handle(path, api::QueryParams(params.begin(), params.end()));
        }
        return {r.status, r.content_type, r.body};
    }

private:
    static api::ServiceOptions options(const std::filesystem::path& store_path,
                                       const std::optional<std::filesystem::path>& jobs_dir) {
        api::ServiceOptions o;
        o.store_path = store_path;
        o.jobs_dir = jobs_dir.value_or(std::filesystem::path(store_path.string() + ".jobs"));
        return o;
    }

    api::Service service_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "news-link observatory core";
    app::set_log_level(app::LogLevel::Warn);

    m.def("registrable_domain", [](const std::string& host) {
        return parser::PublicSuffixList::bundled().registrable_domain(host);
    });
    m.def("normalize_domain", &parser::normalize_domain, py::arg("url"));
    m.def("parse_replay_line", [](const std::string& line) {
        const auto frame = ingest::decode_replay_line(line);
        py::list out;
        for (const auto& e : frame.events) {
            if (e.kind == ingest::EventKind::Post) out.append(to_python(parser::to_json(parser::parse_post(e))));
        }
        return out;
    }, "Parsed posts carried by one replay line; empty for engagements and skipped kinds.");

    py::class_<ratings::RatingTable>(m, "RatingTable")
        .def_static("load", [](const std::filesystem::path& scores, std::optional<std::filesystem::path> mbfc,
                               std::optional<std::filesystem::path> allsides,
                               std::optional<std::filesystem::path> newsguard) {
            return ratings::RatingTable::load(rating_files(scores, mbfc, allsides, newsguard));
        }, py::arg("score_file"), py::arg("mbfc_file") = py::none(), py::arg("allsides_file") = py::none(),
           py::arg("newsguard_orientation_file") = py::none())
        .def("classify", [](const ratings::RatingTable& t, const std::string& domain) {
            const auto r = t.classify(domain);
            py::dict d;
            d["domain"] = r.domain;
            d["score"] = r.score;
            d["reliability"] = std::string(ratings::to_string(r.reliability));
            d["orientation"] = std::string(ratings::to_string(r.orientation));
            d["orientation_source"] = std::string(ratings::to_string(r.orientation_source));
            return d;
        })
        .def("__len__", &ratings::RatingTable::size);

    m.def("edge_weight", &analytics::edge_weight, py::arg("w_ut"), py::arg("w_t"));
    m.def("log_odds_delta", [](double y_i, double n_i, double y_j, double n_j, double a_w, double a_0,
                               bool conventional) {
        return analytics::log_odds_delta(y_i, n_i, y_j, n_j, a_w, a_0,
                                         conventional ? analytics::DenominatorForm::Conventional
                                                      : analytics::DenominatorForm::AsPrinted);
    }, py::arg("y_i"), py::arg("n_i"), py::arg("y_j"), py::arg("n_j"), py::arg("a_w"), py::arg("a_0"),
       py::arg("conventional") = false);
    m.def("k_core", [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t k) {
        return analytics::k_core_nodes(graph_from(n, edges), k);
    }, py::arg("n"), py::arg("edges"), py::arg("k"), "Node ids of the k-core of an undirected graph on 0..n-1.");
    m.def("max_k_core", [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        return analytics::max_k_core(graph_from(n, edges)).k;
    }, py::arg("n"), py::arg("edges"));
    m.def("louvain", [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                        std::uint64_t seed) {
        analytics::LouvainOptions opts;
        opts.seed = seed;
        const auto p = analytics::louvain(graph_from(n, edges), opts);
        return std::make_pair(p.community, p.modularity);
    }, py::arg("n"), py::arg("edges"), py::arg("seed") = 42, "(community per node, modularity)");

    m.def("ingest_replay", &ingest_replay, py::arg("store_path"), py::arg("replay_path"),
          py::arg("posts_fixture") = py::none(), py::arg("resolver_url") = "https://public.api.bsky.app",
          py::arg("resume_cursor") = py::none());
    m.def("run_audiences", [](const std::filesystem::path& store_path, const std::filesystem::path& jobs_dir,
                              std::uint64_t seed) {
        store::StoreOptions ro;
        ro.read_only = true;
        analytics::AudienceOptions opts;
        opts.seed = seed;
        analytics::AudienceResult result;
        {
            py::gil_scoped_release release;
            const auto store = store::Store::open(store_path, ro);
            result = analytics::run_audience_job(*store, std::nullopt, opts);
            analytics::save_audience_job(jobs_dir, result);
        }
        return to_python(analytics::to_json(result, 20, false));
    }, py::arg("store_path"), py::arg("jobs_dir"), py::arg("seed") = 42);

    py::class_<Api>(m, "Api")
        .def(py::init<const std::filesystem::path&, const std::filesystem::path&, std::optional<std::filesystem::path>,
                      std::optional<std::filesystem::path>, std::optional<std::filesystem::path>,
                      std::optional<std::filesystem::path>>(),
             py::arg("store_path"), py::arg("score_file"), py::arg("mbfc_file") = py::none(),
             py::arg("allsides_file") = py::none(), py::arg("newsguard_orientation_file") = py::none(),
             py::arg("jobs_dir") = py::none())
        .def("get", &Api::get, py::arg("path"), py::arg("params") = std::map<std::string, std::string>{});
}
