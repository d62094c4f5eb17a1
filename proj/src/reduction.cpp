#include "kerrsim/reduction.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kerrsim/textutil.hpp"

namespace kerrsim {

int ReducedSystem::state_index(std::string_view name) const {
    for (size_t i = 0; i < resonators.size(); ++i)
        if (resonators[i].name == name) return static_cast<int>(i);
    return -1;
}

int ReducedSystem::output_index(std::string_view name) const {
    for (size_t i = 0; i < output_names.size(); ++i)
        if (output_names[i] == name) return static_cast<int>(i);
    return -1;
}

ComponentBlock component_block(const ComponentKind& kind, const std::string& name) {
    ComponentBlock b;
    using Tag = ComponentKind::Tag;
    switch (kind.tag) {
        case Tag::Resonator: {
            const auto& p = kind.resonator;
            int n = static_cast<int>(p.couplings.size());
            double kappa = p.total_kappa();
            b.A = CMatrix::Zero(1, 1);
            b.A(0, 0) = Complex(-kappa / 2.0, -p.delta);
            b.a = CVector::Zero(1);
            b.B = CMatrix::Zero(1, n);
            b.C = CMatrix::Zero(n, 1);
            b.D = CMatrix::Identity(n, n);
            b.c = CVector::Zero(n);
            for (int k = 0; k < n; ++k) {
                Complex root = std::sqrt(Complex(p.couplings[k].kappa, 0.0));
                Complex phase = std::exp(Complex(0.0, p.couplings[k].psi));
                b.B(0, k) = -root / phase; // -sqrt(kappa_k) e^{-i psi_k}
                b.C(k, 0) = root * phase;  //  sqrt(kappa_k) e^{+i psi_k}
            }
            b.resonators.push_back({name, p.delta, kappa, p.chi});
            return b;
        }
        case Tag::Beamsplitter: {
            b.A.resize(0, 0);
            b.a.resize(0);
            b.B.resize(0, 2);
            b.C.resize(2, 0);
            b.D = CMatrix::Zero(2, 2);
            double ct = std::cos(kind.theta), st = std::sin(kind.theta);
            b.D << Complex(ct), Complex(-st), Complex(st), Complex(ct);
            b.c = CVector::Zero(2);
            return b;
        }
        case Tag::Phaseshifter:
        case Tag::Displacement:
        case Tag::Identity: {
            b.A.resize(0, 0);
            b.a.resize(0);
            b.B.resize(0, 1);
            b.C.resize(1, 0);
            b.D = CMatrix::Identity(1, 1);
            b.c = CVector::Zero(1);
            if (kind.tag == Tag::Phaseshifter) b.D(0, 0) = std::exp(Complex(0.0, kind.phi));
            if (kind.tag == Tag::Displacement) b.c(0) = kind.beta0;
            return b;
        }
        case Tag::Input:
        case Tag::Compound:
            throw std::logic_error("component_block: not a primitive circuit component");
    }
    throw std::logic_error("component_block: unreachable");
}

ComponentBlock concatenate(const std::vector<ComponentBlock>& blocks) {
    int ns = 0, ni = 0, no = 0;
    for (const auto& b : blocks) {
        ns += b.n_states();
        ni += b.n_inputs();
        no += b.n_outputs();
    }
    ComponentBlock r;
    r.A = CMatrix::Zero(ns, ns);
    r.a = CVector::Zero(ns);
    r.B = CMatrix::Zero(ns, ni);
    r.C = CMatrix::Zero(no, ns);
    r.c = CVector::Zero(no);
    r.D = CMatrix::Zero(no, ni);
    int s = 0, i = 0, o = 0;
    for (const auto& b : blocks) {
        r.A.block(s, s, b.n_states(), b.n_states()) = b.A;
        r.a.segment(s, b.n_states()) = b.a;
        r.B.block(s, i, b.n_states(), b.n_inputs()) = b.B;
        r.C.block(o, s, b.n_outputs(), b.n_states()) = b.C;
        r.c.segment(o, b.n_outputs()) = b.c;
        r.D.block(o, i, b.n_outputs(), b.n_inputs()) = b.D;
        for (const auto& rs : b.resonators) r.resonators.push_back(rs);
        s += b.n_states();
        i += b.n_inputs();
        o += b.n_outputs();
    }
    return r;
}

namespace {

CVector bare_diagonal(const std::vector<ResonatorState>& res) {
    CVector bare(res.size());
    for (size_t j = 0; j < res.size(); ++j)
        bare(j) = Complex(-res[j].kappa / 2.0, -res[j].delta);
    return bare;
}

} // namespace

ReducedSystem eliminate_internal(const ComponentBlock& block,
                                 const std::vector<std::pair<int, int>>& connections,
                                 double cond_limit) {
    int ni = block.n_inputs(), no = block.n_outputs();
    int nc = static_cast<int>(connections.size());

    std::vector<bool> in_internal(ni, false), out_internal(no, false);
    for (const auto& [o, i] : connections) {
        if (o < 0 || o >= no || i < 0 || i >= ni)
            throw ValidationError("eliminate_internal: connection index out of range");
        if (out_internal[o] || in_internal[i])
            throw ValidationError("eliminate_internal: port connected twice");
        out_internal[o] = true;
        in_internal[i] = true;
    }
    std::vector<int> ext_in, ext_out, int_in, int_out;
    for (int k = 0; k < ni; ++k)
        if (!in_internal[k]) ext_in.push_back(k);
    for (int k = 0; k < no; ++k)
        if (!out_internal[k]) ext_out.push_back(k);
    for (const auto& [o, i] : connections) {
        int_out.push_back(o);
        int_in.push_back(i);
    }

    auto cols = [](const CMatrix& m, const std::vector<int>& idx) {
        CMatrix r(m.rows(), idx.size());
        for (size_t k = 0; k < idx.size(); ++k) r.col(k) = m.col(idx[k]);
        return r;
    };
    auto rows = [](const CMatrix& m, const std::vector<int>& idx) {
        CMatrix r(idx.size(), m.cols());
        for (size_t k = 0; k < idx.size(); ++k) r.row(k) = m.row(idx[k]);
        return r;
    };
    auto seg = [](const CVector& v, const std::vector<int>& idx) {
        CVector r(idx.size());
        for (size_t k = 0; k < idx.size(); ++k) r(k) = v(idx[k]);
        return r;
    };

    CMatrix B_E = cols(block.B, ext_in), B_I = cols(block.B, int_in);
    CMatrix C_E = rows(block.C, ext_out), C_I = rows(block.C, int_out);
    CVector c_E = seg(block.c, ext_out), c_I = seg(block.c, int_out);
    CMatrix D_EE = cols(rows(block.D, ext_out), ext_in);
    CMatrix D_EI = cols(rows(block.D, ext_out), int_in);
    CMatrix D_IE = cols(rows(block.D, int_out), ext_in);
    CMatrix D_II = cols(rows(block.D, int_out), int_in);

    ReducedSystem rs;
    rs.resonators = block.resonators;
    rs.bare = bare_diagonal(rs.resonators);

    if (nc == 0) {
        rs.A = block.A - CMatrix(rs.bare.asDiagonal());
        rs.a = block.a;
        rs.B = B_E;
        rs.C = C_E;
        rs.c = c_E;
        rs.D = D_EE;
        return rs;
    }

    CMatrix M = CMatrix::Identity(nc, nc) - D_II;
    Eigen::PartialPivLU<CMatrix> lu(M);
    CMatrix Minv = lu.inverse();
    double cond = M.cwiseAbs().colwise().sum().maxCoeff() *
                  Minv.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(cond) || cond > cond_limit) {
        // point at the loop: largest entries of the near-null singular vector
        Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
        CVector v = svd.matrixV().col(nc - 1);
        std::ostringstream os;
        os << "internal connection loop is singular at unit round-trip gain "
              "(condition number "
           << cond << "); dominant internal connections:";
        for (int k = 0; k < nc; ++k)
            if (std::abs(v(k)) > 0.3) os << " #" << k;
        throw ValidationError(os.str());
    }

    CMatrix XC = Minv * C_I;
    CVector xc = Minv * c_I;
    CMatrix XD = Minv * D_IE;

    rs.A = block.A + B_I * XC - CMatrix(rs.bare.asDiagonal());
    rs.a = block.a + B_I * xc;
    rs.B = B_E + B_I * XD;
    rs.C = C_E + D_EI * XC;
    rs.c = c_E + D_EI * xc;
    rs.D = D_EE + D_EI * XD;
    return rs;
}

namespace {

struct PortLayout {
    std::vector<int> in_offset, out_offset; // per component
    int n_in = 0, n_out = 0;
};

PortLayout layout_ports(const FlatCircuit& fc) {
    PortLayout pl;
    for (const auto& comp : fc.components) {
        pl.in_offset.push_back(pl.n_in);
        pl.out_offset.push_back(pl.n_out);
        pl.n_in += comp.kind.n_inputs();
        pl.n_out += comp.kind.n_outputs();
    }
    return pl;
}

void require_simulable(const FlatCircuit& fc) {
    CircuitReport rep = check_circuit(fc);
    if (!rep.simulable()) {
        std::string msg = "circuit is not simulable:";
        for (size_t i = 0; i < rep.violations.size() && i < 8; ++i)
            msg += "\n  " + rep.violations[i];
        if (rep.violations.size() > 8)
            msg += "\n  ... (" + std::to_string(rep.violations.size() - 8) + " more)";
        throw ValidationError(msg);
    }
}

void fill_names(const FlatCircuit& fc, ReducedSystem& rs) {
    for (const auto& in : fc.inputs) {
        rs.input_names.push_back(in.name);
        rs.input_drives.push_back(in.drive);
    }
    for (const auto& o : fc.outputs) rs.output_names.push_back(o.name);
}

} // namespace

ReducedSystem reduce(const FlatCircuit& fc) {
    require_simulable(fc);
    PortLayout pl = layout_ports(fc);

    std::vector<ComponentBlock> blocks;
    blocks.reserve(fc.components.size());
    for (const auto& comp : fc.components) blocks.push_back(component_block(comp.kind, comp.name));
    ComponentBlock big = concatenate(blocks);

    std::vector<std::pair<int, int>> connections;
    for (const auto& conn : fc.connections)
        connections.emplace_back(pl.out_offset[conn.from_comp] + conn.from_port,
                                 pl.in_offset[conn.to_comp] + conn.to_port);

    ReducedSystem rs = eliminate_internal(big, connections);

    // eliminate_internal keeps external ports in ascending global-port order;
    // re-order columns/rows to the FlatCircuit's declared input/output order.
    std::vector<bool> in_internal(pl.n_in, false), out_internal(pl.n_out, false);
    for (const auto& [o, i] : connections) {
        out_internal[o] = true;
        in_internal[i] = true;
    }
    std::vector<int> ext_in_pos(pl.n_in, -1), ext_out_pos(pl.n_out, -1);
    int k = 0;
    for (int g = 0; g < pl.n_in; ++g)
        if (!in_internal[g]) ext_in_pos[g] = k++;
    k = 0;
    for (int g = 0; g < pl.n_out; ++g)
        if (!out_internal[g]) ext_out_pos[g] = k++;

    CMatrix B(rs.B.rows(), fc.inputs.size());
    CMatrix D(fc.outputs.size(), fc.inputs.size());
    CMatrix C(fc.outputs.size(), rs.C.cols());
    CVector c(fc.outputs.size());
    std::vector<int> in_cols, out_rows;
    for (const auto& in : fc.inputs) {
        int g = pl.in_offset[in.to_comp] + in.to_port;
        in_cols.push_back(ext_in_pos[g]);
    }
    for (const auto& o : fc.outputs) {
        int g = pl.out_offset[o.from_comp] + o.from_port;
        out_rows.push_back(ext_out_pos[g]);
    }
    for (size_t j = 0; j < in_cols.size(); ++j) B.col(j) = rs.B.col(in_cols[j]);
    for (size_t j = 0; j < out_rows.size(); ++j) {
        C.row(j) = rs.C.row(out_rows[j]);
        c(j) = rs.c(out_rows[j]);
    }
    for (size_t r = 0; r < out_rows.size(); ++r)
        for (size_t cidx = 0; cidx < in_cols.size(); ++cidx)
            D(r, cidx) = rs.D(out_rows[r], in_cols[cidx]);
    rs.B = std::move(B);
    rs.C = std::move(C);
    rs.c = std::move(c);
    rs.D = std::move(D);

    fill_names(fc, rs);
    return rs;
}

// ---------------------------------------------------------------------------
// Back-propagation reduction (independent of the algebraic path)
// ---------------------------------------------------------------------------

namespace {

struct LinComb {
    CVector alpha; // coefficients over resonator states
    CVector ext;   // coefficients over external inputs
    Complex cst{0.0, 0.0};
};

} // namespace

ReducedSystem backprop_reduce(const FlatCircuit& fc) {
    require_simulable(fc);

    int n_comp = static_cast<int>(fc.components.size());
    std::vector<ComponentBlock> blocks;
    blocks.reserve(n_comp);
    std::vector<int> state_of(n_comp, -1);
    std::vector<ResonatorState> resonators;
    for (int ci = 0; ci < n_comp; ++ci) {
        blocks.push_back(component_block(fc.components[ci].kind, fc.components[ci].name));
        if (!blocks.back().resonators.empty()) {
            state_of[ci] = static_cast<int>(resonators.size());
            resonators.push_back(blocks.back().resonators[0]);
        }
    }
    int ns = static_cast<int>(resonators.size());
    int nin = static_cast<int>(fc.inputs.size());

    // feeder of each component input port: (-1, input index) or (producer comp, port)
    struct Feeder {
        int comp = -2;
        int idx = -1;
    };
    std::map<std::pair<int, int>, Feeder> feeder;
    for (const auto& conn : fc.connections)
        feeder[{conn.to_comp, conn.to_port}] = {conn.from_comp, conn.from_port};
    for (int ii = 0; ii < nin; ++ii) {
        const auto& in = fc.inputs[ii];
        feeder[{in.to_comp, in.to_port}] = {-1, ii};
    }

    std::map<std::pair<int, int>, LinComb> memo;
    std::map<std::pair<int, int>, int> visiting; // 1 = in progress

    std::function<LinComb(int, int)> out_field;
    std::function<LinComb(int, int)> in_field = [&](int comp, int port) -> LinComb {
        Feeder f = feeder.at({comp, port});
        if (f.comp == -1) {
            LinComb lc;
            lc.alpha = CVector::Zero(ns);
            lc.ext = CVector::Zero(nin);
            lc.ext(f.idx) = 1.0;
            return lc;
        }
        return out_field(f.comp, f.idx);
    };

    out_field = [&](int comp, int port) -> LinComb {
        auto key = std::make_pair(comp, port);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (visiting[key])
            throw ValidationError("static loop detected at " + fc.components[comp].name + "." +
                                  std::to_string(port) +
                                  "; use the algebraic reduction for loop circuits");
        visiting[key] = 1;

        const ComponentBlock& b = blocks[comp];
        LinComb lc;
        lc.alpha = CVector::Zero(ns);
        lc.ext = CVector::Zero(nin);
        if (state_of[comp] >= 0) lc.alpha(state_of[comp]) = b.C(port, 0);
        lc.cst = b.c(port);
        for (int k = 0; k < b.n_inputs(); ++k) {
            Complex d = b.D(port, k);
            if (d == Complex(0.0, 0.0)) continue;
            LinComb up = in_field(comp, k);
            lc.alpha += d * up.alpha;
            lc.ext += d * up.ext;
            lc.cst += d * up.cst;
        }
        visiting[key] = 0;
        memo[key] = lc;
        return lc;
    };

    ReducedSystem rs;
    rs.resonators = resonators;
    rs.bare = bare_diagonal(resonators);
    rs.A = CMatrix::Zero(ns, ns);
    rs.a = CVector::Zero(ns);
    rs.B = CMatrix::Zero(ns, nin);
    rs.C = CMatrix::Zero(fc.outputs.size(), ns);
    rs.c = CVector::Zero(fc.outputs.size());
    rs.D = CMatrix::Zero(fc.outputs.size(), nin);

    for (int ci = 0; ci < n_comp; ++ci) {
        int j = state_of[ci];
        if (j < 0) continue;
        const ComponentBlock& b = blocks[ci];
        for (int k = 0; k < b.n_inputs(); ++k) {
            Complex coeff = b.B(0, k);
            LinComb up = in_field(ci, k);
            rs.A.row(j) += coeff * up.alpha.transpose();
            rs.B.row(j) += coeff * up.ext.transpose();
            rs.a(j) += coeff * up.cst;
        }
    }
    for (size_t oi = 0; oi < fc.outputs.size(); ++oi) {
        LinComb lc = out_field(fc.outputs[oi].from_comp, fc.outputs[oi].from_port);
        rs.C.row(oi) = lc.alpha.transpose();
        rs.D.row(oi) = lc.ext.transpose();
        rs.c(oi) = lc.cst;
    }

    fill_names(fc, rs);
    return rs;
}

std::string serialize_reduced(const ReducedSystem& rs) {
    std::ostringstream os;
    os << "reduced_system states=" << rs.n_states() << " inputs=" << rs.n_inputs()
       << " outputs=" << rs.n_outputs() << "\n";
    auto mat = [&](const char* name, const CMatrix& m) {
        os << name << " " << m.rows() << "x" << m.cols() << "\n";
        for (int r = 0; r < m.rows(); ++r) {
            for (int c2 = 0; c2 < m.cols(); ++c2)
                os << (c2 ? " " : "") << format_double(m(r, c2).real()) << ","
                   << format_double(m(r, c2).imag());
            os << "\n";
        }
    };
    mat("A", rs.A);
    mat("a", rs.a);
    mat("B", rs.B);
    mat("C", rs.C);
    mat("c", rs.c);
    mat("D", rs.D);
    os << "resonators\n";
    for (int j = 0; j < rs.n_states(); ++j) {
        const auto& r = rs.resonators[j];
        os << j << " " << r.name << " delta=" << format_double(r.delta)
           << " kappa=" << format_double(r.kappa) << " chi=" << format_double(r.chi) << "\n";
    }
    os << "inputs\n";
    for (int j = 0; j < rs.n_inputs(); ++j) {
        os << j << " " << rs.input_names[j] << " "
           << (rs.input_drives[j].empty() ? std::string("vacuum")
                                          : "drive=" + rs.input_drives[j])
           << "\n";
    }
    os << "outputs\n";
    for (int j = 0; j < rs.n_outputs(); ++j) os << j << " " << rs.output_names[j] << "\n";
    return os.str();
}

} // namespace kerrsim
