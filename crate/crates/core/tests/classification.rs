use proptest::prelude::*;
use trackscope::domain::{
    classify_party, registrable_domain, ClassificationMode, Party, PublicSuffixTable, SiteContext,
};

const BOTH: [ClassificationMode; 2] = [ClassificationMode::PaperContainment, ClassificationMode::RegistrableDomain];

#[test]
fn amazon_examples_in_both_modes() {
    let table = PublicSuffixTable::pinned();
    for mode in BOTH {
        assert_eq!(classify_party("amazon.de", "fls-eu.amazon.de", mode, &table).unwrap().value, Party::FirstParty);
        assert_eq!(classify_party("amazon.de", "zanox.com", mode, &table).unwrap().value, Party::ThirdParty);
        assert_eq!(
            classify_party("amazon.de", "http://zanox.com/ppv/?28135", mode, &table).unwrap().value,
            Party::ThirdParty
        );
        assert_eq!(classify_party("amazon.de", ".amazon.de", mode, &table).unwrap().value, Party::FirstParty);
    }
}

#[test]
fn modes_differ_where_expected() {
    let table = PublicSuffixTable::pinned();
    let paper = ClassificationMode::PaperContainment;
    let psl = ClassificationMode::RegistrableDomain;
    // A subdomain site sees its parent domain as third-party only under containment.
    assert_eq!(classify_party("news.bbc.co.uk", "static.bbc.co.uk", paper, &table).unwrap().value, Party::ThirdParty);
    assert_eq!(classify_party("news.bbc.co.uk", "static.bbc.co.uk", psl, &table).unwrap().value, Party::FirstParty);
    // Label alignment: a shared string suffix is not a shared domain.
    for mode in BOTH {
        assert_eq!(classify_party("amazon.de", "notamazon.de", mode, &table).unwrap().value, Party::ThirdParty);
    }
    assert_eq!(registrable_domain("fls-eu.amazon.de", &table).unwrap().name, "amazon.de");
    assert_eq!(registrable_domain("a.b.example.co.uk", &table).unwrap().name, "example.co.uk");
    assert!(!registrable_domain("co.uk", &table).unwrap().registrable);
}

#[test]
fn bad_hosts_are_errors() {
    let table = PublicSuffixTable::pinned();
    for bad in ["", "a..b", "http://", "bad host.com"] {
        assert!(classify_party("amazon.de", bad, ClassificationMode::RegistrableDomain, &table).is_err(), "{bad:?}");
    }
}

fn label() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,6}"
}

fn site() -> impl Strategy<Value = String> {
    (label(), prop::sample::select(vec!["com", "de", "co.uk", "com.au", "co.jp"])).prop_map(|(l, s)| format!("{l}.{s}"))
}

proptest! {
    #[test]
    fn subdomains_are_first_party(site in site(), subs in prop::collection::vec(label(), 0..3)) {
        let table = PublicSuffixTable::pinned();
        let mut host = site.clone();
        for s in &subs {
            host = format!("{s}.{host}");
        }
        for mode in BOTH {
            prop_assert_eq!(classify_party(&site, &host, mode, &table).unwrap().value, Party::FirstParty);
            prop_assert_eq!(classify_party(&site, &format!("https://{host}/x?y=1"), mode, &table).unwrap().value, Party::FirstParty);
        }
    }

    #[test]
    fn distinct_registrables_are_third_party(a in site(), b in site()) {
        prop_assume!(a != b);
        let table = PublicSuffixTable::pinned();
        for mode in BOTH {
            prop_assert_eq!(classify_party(&a, &b, mode, &table).unwrap().value, Party::ThirdParty);
            prop_assert_eq!(classify_party(&a, &format!("cdn.{b}"), mode, &table).unwrap().value, Party::ThirdParty);
        }
    }

    #[test]
    fn case_and_trailing_dot_ignored(a in site(), b in site()) {
        let table = PublicSuffixTable::pinned();
        let ctx = SiteContext::new(&a, ClassificationMode::RegistrableDomain, &table).unwrap();
        let plain = ctx.classify(&b).unwrap();
        prop_assert_eq!(ctx.classify(&format!("{}.", b.to_uppercase())).unwrap(), plain);
    }

    #[test]
    fn containment_implies_same_registrable(site in site(), subs in prop::collection::vec(label(), 0..3), other in site()) {
        let table = PublicSuffixTable::pinned();
        let host = if subs.is_empty() { other } else { format!("{}.{site}", subs.join(".")) };
        let paper = classify_party(&site, &host, ClassificationMode::PaperContainment, &table).unwrap();
        let psl = classify_party(&site, &host, ClassificationMode::RegistrableDomain, &table).unwrap();
        if paper.value == Party::FirstParty {
            prop_assert_eq!(psl.value, Party::FirstParty);
        }
    }
}
