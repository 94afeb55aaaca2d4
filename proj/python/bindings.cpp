// SPDX-License-Identifier: Apache-2.0
#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/pipeline.hpp"
#include "sps/ppw.hpp"
#include "sps/storage.hpp"
#include "sps/systolic.hpp"
#include "sps/tensor.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace sps;

namespace {

using WeightArray = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;
using MapArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

Tensor4 to_tensor(const WeightArray& a)
{
    if (a.ndim() != 4) {
        throw DimensionError("weights must be 4-d (c_out, c_in, h_k, w_k)");
    }
    std::vector<std::int8_t> v(a.data(), a.data() + a.size());
    return Tensor4(std::uint32_t(a.shape(0)), std::uint32_t(a.shape(1)), std::uint32_t(a.shape(2)),
                   std::uint32_t(a.shape(3)), std::move(v));
}

WeightArray from_tensor(const Tensor4& t)
{
    WeightArray a({t.c_out(), t.c_in(), t.h_k(), t.w_k()});
    std::memcpy(a.mutable_data(), t.values().data(), t.size());
    return a;
}

FeatureMap to_map(const MapArray& a)
{
    if (a.ndim() != 3) {
        throw DimensionError("feature map must be 3-d (c, h, w)");
    }
    std::vector<std::int32_t> v(a.data(), a.data() + a.size());
    return FeatureMap(std::uint32_t(a.shape(0)), std::uint32_t(a.shape(1)), std::uint32_t(a.shape(2)), std::move(v));
}

MapArray from_map(const FeatureMap& fm)
{
    MapArray a({fm.c(), fm.h(), fm.w()});
    std::memcpy(a.mutable_data(), fm.values().data(), fm.size() * sizeof(std::int32_t));
    return a;
}

py::dict counters_dict(const EventCounters& c)
{
    py::dict d;
    d["weight_fetches"] = c.weight_fetches;
    d["mac_ops"] = c.mac_ops;
    d["index_reads"] = c.index_reads;
    d["act_fetches"] = c.act_fetches;
    d["psum_accums"] = c.psum_accums;
    d["reorder_moves"] = c.reorder_moves;
    d["output_writes"] = c.output_writes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_spsflow, m)
{
    m.doc() = "Sparse periodic systolic compiler and simulator";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ComplianceError>(m, "ComplianceError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<VerificationError>(m, "VerificationError", PyExc_RuntimeError);

    py::class_<PpsConfig>(m, "PpsConfig")
        .def_readonly("period", &PpsConfig::period)
        .def_readonly("support", &PpsConfig::support)
        .def_property_readonly("patterns",
                               [](const PpsConfig& c) {
                                   std::vector<std::vector<KernelPos>> out;
                                   for (const auto& p : c.patterns) out.push_back(p.positions);
                                   return out;
                               })
        .def("to_json", &config_to_json)
        .def_static("from_json", &config_from_json);

    m.def(
        "make_config",
        [](const WeightArray& w, std::uint32_t period, std::uint32_t support, const std::string& strategy,
           std::uint64_t seed) { return make_config(to_tensor(w), period, support, parse_strategy(strategy), seed); },
        py::arg("weights"), py::arg("period") = 8, py::arg("support") = 2, py::arg("strategy") = "magnitude",
        py::arg("seed") = 1);
    m.def("apply_mask", [](const WeightArray& w, const PpsConfig& cfg) {
        return from_tensor(apply_periodic_mask(to_tensor(w), cfg));
    });

    py::class_<PpwLayer>(m, "PpwLayer")
        .def_readonly("period", &PpwLayer::period)
        .def_readonly("support", &PpwLayer::support)
        .def_readonly("c_in", &PpwLayer::c_in)
        .def_readonly("c_out", &PpwLayer::c_out)
        .def_readonly("sys_w", &PpwLayer::sys_w)
        .def_readonly("sys_h", &PpwLayer::sys_h)
        .def_readonly("out_perm", &PpwLayer::out_perm)
        .def_readonly("in_perm", &PpwLayer::in_perm)
        .def_property_readonly("index_section_bits", &index_section_bits)
        .def("decode", [](const PpwLayer& l) { return from_tensor(decode_ppw_natural(l)); })
        .def("to_bytes", [](const PpwLayer& l) {
            auto b = serialize(l);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        })
        .def_static("from_bytes", [](const py::bytes& b) {
            std::string s = b;
            return deserialize_ppw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
        });

    m.def(
        "compile_layer",
        [](const WeightArray& masked, const PpsConfig& cfg, std::uint32_t sys_w, std::uint32_t sys_h) {
            return compile_layer(to_tensor(masked), cfg, sys_w, sys_h);
        },
        py::arg("masked"), py::arg("config"), py::arg("sys_w") = 8, py::arg("sys_h") = 8);

    m.def(
        "conv2d",
        [](const MapArray& x, const WeightArray& w, std::uint32_t stride, std::uint32_t pad) {
            return from_map(conv2d_dense(to_map(x), to_tensor(w), {stride, pad}));
        },
        py::arg("ifm"), py::arg("weights"), py::arg("stride") = 1, py::arg("pad") = 1);

    m.def(
        "simulate",
        [](const MapArray& x, const PpwLayer& layer, std::uint32_t stride, std::uint32_t pad) {
            auto r = simulate_sps(to_map(x), layer, {stride, pad}, true);
            return py::make_tuple(from_map(r.ofm), counters_dict(r.counters));
        },
        py::arg("ifm"), py::arg("layer"), py::arg("stride") = 1, py::arg("pad") = 1);

    m.def(
        "storage_bits",
        [](const std::string& format, std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k,
           std::uint32_t period, std::uint32_t support, const std::string& preset) {
            auto s = storage_of(parse_format(format), pps_shape("layer", c_out, c_in, h_k, w_k, support),
                                BitWidthPolicy::from_preset(parse_preset(preset)), {period, support, std::nullopt});
            return py::make_tuple(s.weight_bits, s.index_bits);
        },
        py::arg("format"), py::arg("c_out"), py::arg("c_in"), py::arg("h_k") = 3, py::arg("w_k") = 3,
        py::arg("period") = 8, py::arg("support") = 2, py::arg("preset") = "paper-calibrated");

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_json, const std::string& base_dir) {
            auto cfg = pipeline_config_from_json(config_json, base_dir);
            cfg.validate();
            CommandResult r;
            if (command == "prune") r = cmd_prune(cfg);
            else if (command == "compile") r = cmd_compile(cfg);
            else if (command == "simulate") r = cmd_simulate(cfg);
            else if (command == "storage-report") r = cmd_storage_report(cfg);
            else if (command == "threshold-bench") r = cmd_threshold_bench(cfg);
            else if (command == "energy-report") r = cmd_energy_report(cfg);
            else throw ConfigError("unknown command " + command);
            return r.written;
        },
        py::arg("command"), py::arg("config_json"), py::arg("base_dir") = ".");
}
