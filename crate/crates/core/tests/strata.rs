use chgraph::chalg::{minimal_quadruple_instance, trivial_instance};
use chgraph::rational::frac;
use chgraph::strata::{parse_strata, to_differential, DualGraph};
use chgraph::verify::{
    bp_relation, mutations, parse_mapping, verify_bp_numeric, zero_point_cross_check, CoefficientTable, DEFAULT_STRATA,
};
use chgraph::genexp::GraphSum;
use chgraph::Error;

#[test]
fn relation_coefficients_and_validity() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    assert_eq!(rel.terms.len(), 20);
    assert_eq!(rel.coefficient("D1"), Some(&frac(-4, 1)));
    assert_eq!(rel.coefficient("D20"), Some(&frac(-1, 5)));
    for (_, d) in &rel.terms {
        assert_eq!(d.total_genus(), 2, "{}", d.name);
        assert_eq!(d.markings.len(), 3);
        assert_eq!(d.codimension(), 2, "{}", d.name);
    }
    for (i, (_, a)) in rel.terms.iter().enumerate() {
        for (_, b) in &rel.terms[i + 1..] {
            let same = a.distinct_labelings().iter().any(|l| l.isomorphic(b));
            assert!(!same, "{} and {} coincide", a.name, b.name);
        }
    }
}

#[test]
fn strata_file_errors_name_the_stratum() {
    let e = parse_strata("stratum X\nv 0 genus 1\nm a at 0\nm b at 0\nm c at 0\n").unwrap_err();
    assert!(matches!(e, Error::Unsupported { ref name, .. } if name == "X"), "{e}");
    let e = parse_strata("stratum Y\nv 0 genus 2\nv 1 genus 0\ne 0 1 psi-at 1\nm a at 1\nm b at 1\nm c at 1\n").unwrap_err();
    assert!(matches!(e, Error::Unsupported { ref name, .. } if name == "Y"), "{e}");
    assert!(matches!(parse_strata("v 0 genus 2\n"), Err(Error::Parse { line: 1, .. })));
    assert!(bp_relation("").is_err());
}

#[test]
fn differential_expressions_of_the_first_strata() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    let d1 = to_differential(&rel.terms[0].1).unwrap();
    assert_eq!(d1.terms.len(), 3);
    assert!(d1.terms.iter().all(|t| t.blocks.len() == 3 && t.eta.len() == 2));
    let d2 = to_differential(&rel.terms[1].1).unwrap();
    assert_eq!(d2.terms.len(), 2);
    assert_eq!(d2.terms.iter().map(|t| t.coeff.clone()).collect::<Vec<_>>(), vec![frac(1, 1), frac(-1, 1)]);
    let d3 = to_differential(&rel.terms[2].1).unwrap();
    assert_eq!(d3.terms.len(), 6);
    let symmetric = parse_strata("stratum S\nv 0 genus 0\nv 1 genus 2\ne 0 1\nm a at 0\nm b at 0\nm c at 0\n").unwrap();
    assert_eq!(to_differential(&symmetric[0]).unwrap().terms.len(), 1);
}

#[test]
fn every_stratum_has_valid_mutations() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    for (_, d) in &rel.terms {
        let ms: Vec<DualGraph> = mutations(d);
        assert!(!ms.is_empty(), "{}", d.name);
        assert!(ms.iter().all(|m| m.validate().is_ok() && d.distinct_labelings().iter().all(|l| !l.isomorphic(m))));
    }
}

#[test]
fn table_export_and_mapping() {
    let a = GraphSum::parse("1/2\tdeg 3;l 0 a;l 0 a;l 0 a\n").unwrap();
    let b = GraphSum::parse("-1/3\tdeg 3;l 0 a;l 0 a;l 0 a\n").unwrap();
    let t = CoefficientTable::from_rows(&[("D1".into(), a), ("D2".into(), b)]);
    let key = t.columns[0].compact();
    let names = parse_mapping(&format!("# names\n{key}\tA1\n")).unwrap();
    assert_eq!(t.to_tsv(&names, true), "stratum\tA1\nD1\t1/2\nD2\t-1/3\n");
    assert_eq!(t.row_values("D2"), vec![frac(-1, 3)]);
}

#[test]
fn numeric_residual_on_the_trivial_instance() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    let r = verify_bp_numeric(&trivial_instance(), &rel, 6).unwrap();
    assert!(r.passed());
}

#[test]
fn numeric_check_refuses_instances_failing_axioms() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    let mut a = trivial_instance();
    a.integral[0] = frac(1, 1);
    a.integral[1] = frac(0, 1);
    assert!(matches!(verify_bp_numeric(&a, &rel, 4), Err(Error::Algebra(_))));
}

#[test]
fn graph_and_series_paths_agree_at_zero() {
    let rel = bp_relation(DEFAULT_STRATA).unwrap();
    for alg in [trivial_instance(), minimal_quadruple_instance()] {
        for c in zero_point_cross_check(&alg, &rel.strata()).unwrap() {
            assert_eq!(c.graph_value, c.series_value, "{} {:?}", c.stratum, c.marks);
        }
    }
}
