import marimo

__generated_with = "0.19.8"
app = marimo.App(width="medium")


@app.cell
def imports():
    import marimo as mo
    import numpy as np
    import plotly.graph_objects as go

    from wdvvroots.dunkl import fiber_identity_check, fiber_partition
    from wdvvroots.exactform import multiplicity_polynomial, table_audit
    from wdvvroots.prepotential import PrepotentialParams, sample_chamber_point
    from wdvvroots.rootsystems import RootSystemSpec, build_root_system, cartan_matrix, table_systems
    from wdvvroots.utils import Timer, format_fraction
    from wdvvroots.wdvv import gamma_profile

    return (
        PrepotentialParams,
        RootSystemSpec,
        Timer,
        build_root_system,
        cartan_matrix,
        fiber_identity_check,
        fiber_partition,
        format_fraction,
        gamma_profile,
        go,
        mo,
        multiplicity_polynomial,
        np,
        sample_chamber_point,
        table_audit,
        table_systems,
    )


@app.cell
def title(mo):
    mo.md("""
    # WDVV for Root-System Prepotentials

    Build a crystallographic root system exactly, read off the invariant
    constant c of its coupling 4-tensor, and watch the WDVV residual of the
    trigonometric prepotential collapse at the right value of gamma.
    """)
    return


@app.cell
def parameters(mo, table_systems):
    params_form = (
        mo.md(
            """
            **Parameters**

            {system}
            {samples}
            {margin}
            {seed}
            """
        )
        .batch(
            system=mo.ui.dropdown(
                options=[s.label for s in table_systems()], value="B2", label="Root system"
            ),
            samples=mo.ui.slider(start=1, stop=10, step=1, value=3, label="Chamber points"),
            margin=mo.ui.slider(start=0.1, stop=0.6, step=0.05, value=0.2, label="Chamber margin"),
            seed=mo.ui.number(start=0, stop=9999, value=42, label="Random seed"),
        )
        .form(submit_button_label="Set Parameters")
    )
    params_form
    return (params_form,)


@app.cell
def system_cell(RootSystemSpec, build_root_system, cartan_matrix, format_fraction, mo, multiplicity_polynomial, params_form, table_audit):
    mo.stop(params_form.value is None, mo.md("**Set parameters first.**"))

    p = params_form.value
    rootsystem = build_root_system(RootSystemSpec.parse(p["system"]))
    verdict, _result = table_audit(rootsystem)

    _cartan = "\n".join("    " + " ".join(f"{x:3d}" for x in row) for row in cartan_matrix(rootsystem.simple_roots))
    _c = "undefined (rank 1)" if verdict.c_oracle is None else format_fraction(verdict.c_oracle)
    _table = "none" if verdict.c_table is None else format_fraction(verdict.c_table)
    _poly = ""
    if rootsystem.rank >= 2:
        _terms = multiplicity_polynomial(rootsystem).coefficients
        _poly = " + ".join(f"{format_fraction(v)} k_{o} k_{q}" for (o, q), v in _terms.items())

    mo.md(
        f"""
    ### {rootsystem.label}: {len(rootsystem.roots)} roots, {len(rootsystem.positive_roots)} positive

    Cartan matrix:

    {_cartan}

    | c (exact) | published c | verdict | c(k) |
    |---|---|---|---|
    | {_c} | {_table} | {verdict.verdict} | {_poly} |
        """
    )
    return p, rootsystem


@app.cell
def run_button(mo):
    run_btn = mo.ui.run_button(label="Scan gamma")
    run_btn
    return (run_btn,)


@app.cell
def profile(PrepotentialParams, Timer, gamma_profile, mo, np, p, rootsystem, run_btn, sample_chamber_point, table_audit):
    mo.stop(not run_btn.value)
    mo.stop(rootsystem.rank < 2, mo.md("*Rank 1: the WDVV system is vacuous.*"))

    points = sample_chamber_point(rootsystem, int(p["seed"]), float(p["margin"]), int(p["samples"]))
    ratios = np.linspace(0.1, 1.5, 57)
    _c = table_audit(rootsystem)[0].c_oracle
    with Timer("profile") as _t:
        residuals = gamma_profile(PrepotentialParams(rootsystem, 1j), points, ratios, _c)
    mo.md(f"Scanned {len(ratios)} values of gamma in {_t.elapsed:.2f}s")
    return points, ratios, residuals


@app.cell
def profile_plot(go, ratios, residuals, rootsystem):
    _fig = go.Figure()
    _fig.add_trace(go.Scatter(x=ratios, y=residuals, mode="lines+markers", name="commutator residual"))
    _fig.add_vline(x=0.5, line_dash="dash", annotation_text="-gamma^2 = c/2")
    _fig.add_vline(x=1.0, line_dash="dot", annotation_text="-gamma^2 = c")
    _fig.update_layout(
        title=f"WDVV residual against -gamma^2 / c for {rootsystem.label}",
        xaxis_title="-gamma^2 / c",
        yaxis_title="max relative commutator",
        yaxis_type="log",
        template="plotly_white",
    )
    _fig
    return


@app.cell
def fibers_header(mo):
    mo.md("""
    ---
    ## Dunkl fibers
    Ordered positive-root pairs grouped by the rotation s_a s_b.
    """)
    return


@app.cell
def fiber_plot(fiber_identity_check, fiber_partition, go, points, rootsystem):
    _partition = fiber_partition(rootsystem)
    _report = fiber_identity_check(rootsystem, points[0])
    _angles = [round(w.rotation_angle(rootsystem), 3) for w in _partition.indices]
    _fig = go.Figure()
    _fig.add_trace(go.Bar(
        x=list(range(len(_angles))),
        y=_partition.sizes(),
        text=[f"{a} deg" for a in _angles],
        name="pairs per fiber",
    ))
    _fig.update_layout(
        title=f"{len(_angles)} fibers, max residual {_report.max_fiber_residual:.2e} ({_report.outcome})",
        xaxis_title="fiber",
        yaxis_title="pairs",
        template="plotly_white",
    )
    _fig
    return


if __name__ == "__main__":
    app.run()
