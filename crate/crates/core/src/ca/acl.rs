use crate::directory::schema::{
    USER_CERTIFICATE, USER_ENCRYPTED_CERTIFICATE, USER_ENCRYPTED_PASSWORD, USER_PKCS12,
};
use crate::directory::{
    Access, Acl, AclRule, AttributeSelector, BindState, Directory, DirectoryError,
    DistinguishedName, Subject, Target,
};

/// Attributes anyone may read: both ciphertexts (needed before the owner can
/// authenticate) and the published certificate.
pub const PUBLIC_ATTRIBUTES: [&str; 3] = [
    USER_ENCRYPTED_PASSWORD,
    USER_ENCRYPTED_CERTIFICATE,
    USER_CERTIFICATE,
];

/// The rule set the CA installs on the directory subtree under `base`:
///
/// 1. the administrator may read and write everything;
/// 2. a bound user may write `userCertificate` on its own entry;
/// 3. a bound user may read `userPKCS12` on its own entry;
/// 4. anonymous and authenticated users may read [`PUBLIC_ATTRIBUTES`].
///
/// Anything else, including every read of `userPassword` by a non-admin,
/// falls through to the default deny.
pub fn standard_acl(base: &DistinguishedName) -> Acl {
    let subtree = || Target::Subtree(base.clone());
    let mut rules = vec![
        AclRule::new(
            Subject::Admin,
            subtree(),
            AttributeSelector::Any,
            Access::Write,
        ),
        AclRule::new(
            Subject::SelfEntry,
            Target::OwnEntry,
            AttributeSelector::named(USER_CERTIFICATE),
            Access::Write,
        ),
        AclRule::new(
            Subject::SelfEntry,
            Target::OwnEntry,
            AttributeSelector::named(USER_PKCS12),
            Access::Read,
        ),
    ];
    for subject in [Subject::Anonymous, Subject::Authenticated] {
        for attr in PUBLIC_ATTRIBUTES {
            rules.push(AclRule::new(
                subject,
                subtree(),
                AttributeSelector::named(attr),
                Access::Read,
            ));
        }
    }
    Acl::new(rules)
}

/// Installs [`standard_acl`] for `base`. `admin` must be an administrator bind.
pub fn configure_acls(
    directory: &Directory,
    admin: &BindState,
    base: &DistinguishedName,
) -> Result<(), DirectoryError> {
    directory.install_acl(standard_acl(base), admin)
}
