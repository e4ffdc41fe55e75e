use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(f: impl FnOnce(Python<'_>, &Bound<'_, PyDict>)) {
    use coldhardiness::coldhardiness as module;
    pyo3::append_to_inittab!(module);
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals
            .set_item("ch", py.import("coldhardiness").unwrap())
            .unwrap();
        f(py, &globals);
    });
}

#[test]
fn bindings_from_python() {
    with_module(|py, globals| {
        let code = c"
corpus = ch.Corpus.synthetic(n_cultivars=2, seasons=[3], seed=5)
names = corpus.names()
truth = ch.truth()
curve = ch.ferguson_predict(corpus.mean_at(names[0], 0), truth)
model = ch.Model.fit(corpus, 'Single', cultivars=[names[1]], epochs=1, fc_dims=[4, 4, 4], gru_hidden=4)
preds = model.predict(corpus, names[1], 0)
result = (len(corpus), len(curve), len(preds), model.variant, sorted(ch.VARIANTS))
";
        py.run(code, Some(globals), None).unwrap();
        let result: (usize, usize, usize, String, Vec<String>) = globals
            .get_item("result")
            .unwrap()
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(result.0, 2);
        assert_eq!(result.1, result.2);
        assert_eq!(result.3, "Single");
        assert_eq!(result.4, ["AddE", "ConcatE", "MultE", "MultiH", "Single"]);

        let err = py
            .run(c"ch.Model.fit(corpus, 'Bogus')", Some(globals), None)
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = py
            .run(
                c"ch.ferguson_predict([1.0], {'t_thh': 1.0})",
                Some(globals),
                None,
            )
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyKeyError>(py));
    });
}
