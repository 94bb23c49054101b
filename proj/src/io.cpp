#include "seapose/io.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace seapose {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path, bool binary = false) {
    if (!fs::exists(path)) {
        throw Error(ErrorCode::MissingFile, path);
    }
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw Error(ErrorCode::ValidationError, "cannot write " + path);
    }
    return out;
}

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ParseError, path + ": " + what);
}

}  // namespace

ReferenceModel load_mesh(const std::string& path) {
    auto in = open_input(path);
    ReferenceModel model;
    model.name = fs::path(path).stem().string();

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) {
                parse_fail(path, "bad vertex at line " + std::to_string(lineno));
            }
            model.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // accept v, v/t, v/t/n, v//n forms; only the vertex index is used
                std::string head = tok.substr(0, tok.find('/'));
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (const std::exception&) {
                    parse_fail(path, "bad face index '" + tok + "' at line " + std::to_string(lineno));
                }
                if (i < 1) {
                    parse_fail(path, "face indices must be positive, line " + std::to_string(lineno));
                }
                idx.push_back(i - 1);
            }
            if (idx.size() != 3) {
                parse_fail(path, "faces must be triangles, line " + std::to_string(lineno));
            }
            model.triangles.push_back({idx[0], idx[1], idx[2]});
        }
        // everything else (vn, vt, comments, groups, materials) is ignored
    }
    validate_model(model);
    model.diameter = mesh_diameter(model.vertices);
    return model;
}

void save_mesh_obj(const ReferenceModel& model, const std::string& path) {
    auto out = open_output(path);
    for (const auto& v : model.vertices) {
        out << "v " << fmt_double(v.x()) << ' ' << fmt_double(v.y()) << ' ' << fmt_double(v.z())
            << '\n';
    }
    for (const auto& t : model.triangles) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

LabeledPointCloud load_cloud(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "ply") parse_fail(path, "not a PLY file");
    if (!std::getline(in, line) || line.rfind("format ascii 1.0", 0) != 0) {
        parse_fail(path, "only 'format ascii 1.0' is supported");
    }

    long vertex_count = -1;
    std::vector<std::string> properties;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "comment" || tag.empty()) continue;
        if (tag == "element") {
            std::string name;
            long count = 0;
            if (!(ss >> name >> count)) parse_fail(path, "bad element line");
            if (name != "vertex") parse_fail(path, "unsupported element '" + name + "'");
            vertex_count = count;
        } else if (tag == "property") {
            std::string type, name;
            if (!(ss >> type >> name)) parse_fail(path, "bad property line");
            properties.push_back(name);
        } else if (tag == "end_header") {
            break;
        } else {
            parse_fail(path, "unexpected header line '" + line + "'");
        }
    }
    if (vertex_count < 0) parse_fail(path, "missing vertex element");

    int ix = -1, iy = -1, iz = -1, ilabel = -1;
    for (std::size_t i = 0; i < properties.size(); ++i) {
        if (properties[i] == "x") ix = static_cast<int>(i);
        else if (properties[i] == "y") iy = static_cast<int>(i);
        else if (properties[i] == "z") iz = static_cast<int>(i);
        else if (properties[i] == "label") ilabel = static_cast<int>(i);
        else parse_fail(path, "unsupported property '" + properties[i] + "'");
    }
    if (ix < 0 || iy < 0 || iz < 0) parse_fail(path, "PLY must have x, y, z properties");

    LabeledPointCloud cloud;
    cloud.points.reserve(vertex_count);
    cloud.labels.reserve(vertex_count);
    std::vector<double> row(properties.size());
    for (long v = 0; v < vertex_count; ++v) {
        if (!std::getline(in, line)) parse_fail(path, "truncated vertex list");
        std::istringstream ss(line);
        for (std::size_t c = 0; c < properties.size(); ++c) {
            if (!(ss >> row[c])) parse_fail(path, "bad vertex row " + std::to_string(v));
        }
        cloud.points.emplace_back(row[ix], row[iy], row[iz]);
        int label = ilabel >= 0 ? static_cast<int>(row[ilabel]) : 0;
        if (label < 0 || label > 2) parse_fail(path, "label out of range in row " + std::to_string(v));
        cloud.labels.push_back(static_cast<PointLabel>(label));
    }
    return cloud;
}

void save_cloud_ply(const LabeledPointCloud& cloud, const std::string& path) {
    auto out = open_output(path);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.points.size() << '\n';
    out << "property double x\nproperty double y\nproperty double z\nproperty int label\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z()) << ' '
            << static_cast<int>(cloud.labels[i]) << '\n';
    }
}

BinaryMask load_mask(const std::string& path) {
    auto in = open_input(path, true);
    std::string magic;
    in >> magic;
    if (magic != "P5") parse_fail(path, "not a binary PGM (P5) file");

    auto next_int = [&](const char* what) {
        // skip whitespace and '#' comments
        int c;
        while ((c = in.peek()) != EOF) {
            if (std::isspace(c)) {
                in.get();
            } else if (c == '#') {
                std::string skip;
                std::getline(in, skip);
            } else {
                break;
            }
        }
        long v;
        if (!(in >> v)) parse_fail(path, std::string("missing ") + what);
        return v;
    };

    long w = next_int("width");
    long h = next_int("height");
    long maxval = next_int("maxval");
    if (w < 1 || h < 1) parse_fail(path, "bad dimensions");
    if (maxval < 1 || maxval > 255) parse_fail(path, "maxval must be in [1, 255]");
    in.get();  // single whitespace after maxval

    BinaryMask mask;
    mask.width = static_cast<int>(w);
    mask.height = static_cast<int>(h);
    mask.values.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(mask.values.data()), static_cast<std::streamsize>(mask.values.size()));
    if (in.gcount() != static_cast<std::streamsize>(mask.values.size())) {
        parse_fail(path, "truncated pixel data");
    }
    for (auto& v : mask.values) v = v > 0 ? 255 : 0;
    return mask;
}

void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
    auto out = open_output(path, true);
    out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.values.data()),
              static_cast<std::streamsize>(mask.values.size()));
}

namespace {

Vec3 json_vec3(const ordered_json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Quat json_quat(const ordered_json& j) {
    if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::ParseError, "expected q_wxyz[4]");
    return Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

RigidTransform json_pose(const ordered_json& j) {
    return RigidTransform(json_quat(j.at("q_wxyz")), json_vec3(j.at("t")));
}

ordered_json pose_json(const RigidTransform& T) {
    const Quat& q = T.rotation;
    return ordered_json{{"q_wxyz", {q.w(), q.x(), q.y(), q.z()}},
                        {"t", {T.translation.x(), T.translation.y(), T.translation.z()}}};
}

}  // namespace

SceneInput load_scene(const std::string& path) {
    auto in = open_input(path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        parse_fail(path, e.what());
    }

    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& rel) { return (base / rel).string(); };

    SceneInput scene;
    try {
        scene.metric = j.at("metric").get<bool>();

        for (const auto& jc : j.at("cameras")) {
            CameraView cam;
            cam.id = jc.at("id").get<std::string>();
            cam.intrinsics.focal = jc.at("f").get<double>();
            cam.intrinsics.principal_point =
                Vec2(jc.at("cx").get<double>(), jc.at("cy").get<double>());
            cam.intrinsics.width = jc.at("width").get<int>();
            cam.intrinsics.height = jc.at("height").get<int>();
            cam.world_pose = RigidTransform(json_quat(jc.at("q_wxyz")), json_vec3(jc.at("t")));
            for (const auto& jh : jc.at("hypotheses")) {
                cam.hypotheses.push_back(json_pose(jh));
            }
            if (jc.contains("mask")) {
                cam.mask_path = jc.at("mask").get<std::string>();
                cam.mask = load_mask(resolve(cam.mask_path));
            }
            scene.cameras.push_back(std::move(cam));
        }

        scene.cloud = load_cloud(resolve(j.at("cloud").get<std::string>()));

        const auto& jm = j.at("model");
        scene.model = load_mesh(resolve(jm.at("mesh").get<std::string>()));
        const auto& js = jm.at("symmetry");
        for (const auto& jd : js.at("discrete")) {
            scene.model.symmetries.discrete.emplace_back(json_quat(jd.at("q_wxyz")), Vec3::Zero());
        }
        for (const auto& ja : js.at("axes")) {
            SymmetryAxis axis;
            axis.dir = json_vec3(ja.at("dir"));
            axis.k = ja.at("k").get<int>();
            scene.model.symmetries.axes.push_back(axis);
        }
    } catch (const nlohmann::json::exception& e) {
        parse_fail(path, e.what());
    }

    // semantic validation
    for (const auto& cam : scene.cameras) {
        if (cam.intrinsics.focal <= 0.0) {
            throw Error(ErrorCode::ValidationError, "camera " + cam.id + ": focal must be > 0");
        }
        if (cam.intrinsics.width < 1 || cam.intrinsics.height < 1) {
            throw Error(ErrorCode::ValidationError, "camera " + cam.id + ": bad image size");
        }
        if (cam.mask &&
            (cam.mask->width != cam.intrinsics.width || cam.mask->height != cam.intrinsics.height)) {
            throw Error(ErrorCode::ValidationError,
                        "camera " + cam.id + ": mask size " + std::to_string(cam.mask->width) + "x" +
                            std::to_string(cam.mask->height) + " does not match image size");
        }
    }
    if (scene.cloud.points.empty()) {
        throw Error(ErrorCode::ValidationError, "scene cloud is empty");
    }
    validate_model(scene.model);
    return scene;
}

void save_scene(const SceneInput& scene, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path base(dir);

    save_mesh_obj(scene.model, (base / "model.obj").string());
    save_cloud_ply(scene.cloud, (base / "cloud.ply").string());

    ordered_json j;
    j["metric"] = scene.metric;
    j["cameras"] = ordered_json::array();
    for (const auto& cam : scene.cameras) {
        ordered_json jc;
        jc["id"] = cam.id;
        jc["f"] = cam.intrinsics.focal;
        jc["cx"] = cam.intrinsics.principal_point.x();
        jc["cy"] = cam.intrinsics.principal_point.y();
        jc["width"] = cam.intrinsics.width;
        jc["height"] = cam.intrinsics.height;
        const Quat& q = cam.world_pose.rotation;
        jc["q_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
        const Vec3& t = cam.world_pose.translation;
        jc["t"] = {t.x(), t.y(), t.z()};
        jc["hypotheses"] = ordered_json::array();
        for (const auto& h : cam.hypotheses) jc["hypotheses"].push_back(pose_json(h));
        if (cam.mask) {
            std::string rel = "masks/" + cam.id + ".pgm";
            save_mask_pgm(*cam.mask, (base / rel).string());
            jc["mask"] = rel;
        }
        j["cameras"].push_back(std::move(jc));
    }
    j["cloud"] = "cloud.ply";
    ordered_json jm;
    jm["mesh"] = "model.obj";
    ordered_json js;
    js["discrete"] = ordered_json::array();
    for (const auto& d : scene.model.symmetries.discrete) {
        const Quat q = d.rotation;
        js["discrete"].push_back(ordered_json{{"q_wxyz", {q.w(), q.x(), q.y(), q.z()}}});
    }
    js["axes"] = ordered_json::array();
    for (const auto& a : scene.model.symmetries.axes) {
        js["axes"].push_back(
            ordered_json{{"dir", {a.dir.x(), a.dir.y(), a.dir.z()}}, {"k", a.k}});
    }
    jm["symmetry"] = std::move(js);
    j["model"] = std::move(jm);

    auto out = open_output((base / "scene.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace seapose
